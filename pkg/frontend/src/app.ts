/** DOM wiring for the console; all behavior lives in the controller. */

import { ConsoleController } from "./controller.js";
import { diagnosticRange, formatDiagnostic, insertAt, lineCount } from "./editor.js";
import type { Diagnostic } from "./types.js";

const STARTER = [
  "visualize",
  "  horsepower as x,",
  "  miles_per_gallon as y",
  "from cars",
  "using points;",
].join("\n");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mountConsole(root: HTMLElement, controller: ConsoleController): void {
  root.innerHTML = "";

  const banner = el("div", "banner hidden");
  const bannerText = el("span");
  const retryButton = el("button", "", "retry");
  retryButton.addEventListener("click", () => void controller.retry());
  banner.append(bannerText, retryButton);

  const sidebar = el("aside", "sidebar");
  const tablesHeading = el("h2", "", "tables");
  const tableList = el("ul", "tables");
  const uploadForm = el("form", "upload");
  const nameInput = el("input") as HTMLInputElement;
  nameInput.placeholder = "table name";
  nameInput.name = "table";
  const fileInput = el("input") as HTMLInputElement;
  fileInput.type = "file";
  fileInput.accept = ".csv,text/csv";
  const uploadButton = el("button", "", "upload csv");
  uploadButton.type = "submit";
  uploadForm.append(nameInput, fileInput, uploadButton);
  uploadForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const file = fileInput.files?.[0];
    if (!file) return;
    const name = nameInput.value.trim() || file.name.replace(/\.csv$/i, "");
    void file.text().then((content) => controller.uploadCsv(name, content));
  });
  sidebar.append(tablesHeading, tableList, uploadForm);

  const editorPane = el("section", "editor");
  const gutter = el("pre", "gutter");
  const textarea = el("textarea") as HTMLTextAreaElement;
  textarea.value = STARTER;
  textarea.spellcheck = false;
  const controls = el("div", "controls");
  const runButton = el("button", "run", "run (ctrl+enter)");
  const seedInput = el("input") as HTMLInputElement;
  seedInput.type = "number";
  seedInput.value = "0";
  seedInput.title = "jitter seed";
  controls.append(runButton, seedInput);
  const diagnosticsList = el("ul", "diagnostics");
  const editorRow = el("div", "editor-row");
  editorRow.append(gutter, textarea);
  editorPane.append(editorRow, controls, diagnosticsList);

  const resultPane = el("section", "result");
  const toast = el("div", "toast hidden");
  const resultBox = el("div", "svg-box");
  const downloadLink = el("a", "download hidden", "download svg") as HTMLAnchorElement;
  downloadLink.download = "chart.svg";
  resultPane.append(toast, resultBox, downloadLink);

  const historyPane = el("section", "history");
  historyPane.append(el("h2", "", "history"));
  const historyList = el("ul");
  historyPane.append(historyList);

  const main = el("main");
  main.append(editorPane, resultPane);
  root.append(banner, sidebar, main, historyPane);

  const refreshGutter = () => {
    gutter.textContent = Array.from(
      { length: lineCount(textarea.value) }, (_, i) => String(i + 1),
    ).join("\n");
  };
  textarea.addEventListener("input", refreshGutter);
  refreshGutter();

  const submit = () => void controller.submit(textarea.value, Number(seedInput.value) || 0);
  runButton.addEventListener("click", submit);
  textarea.addEventListener("keydown", (event) => {
    if ((event.ctrlKey || event.metaKey) && event.key === "Enter") {
      event.preventDefault();
      submit();
    }
  });

  const highlight = (diagnostic: Diagnostic) => {
    const [start, end] = diagnosticRange(textarea.value, diagnostic);
    textarea.focus();
    textarea.setSelectionRange(start, Math.max(end, start + 1));
  };

  const renderHistory = () => {
    historyList.innerHTML = "";
    const entries = controller.history.list();
    for (let i = entries.length - 1; i >= 0; i--) {
      const entry = entries[i];
      const item = el("li", entry.outcome);
      item.textContent = entry.statement.replace(/\s+/g, " ").slice(0, 80);
      item.title = entry.statement;
      item.addEventListener("click", () => {
        textarea.value = entry.statement;
        refreshGutter();
      });
      historyList.append(item);
    }
  };

  controller.onChange((state) => {
    runButton.disabled = state.pending;
    banner.classList.toggle("hidden", state.networkError === null);
    bannerText.textContent = state.networkError ?? "";
    toast.classList.toggle("hidden", state.toast === null);
    toast.textContent = state.toast ?? "";

    diagnosticsList.innerHTML = "";
    for (const d of [...state.diagnostics, ...state.warnings]) {
      const item = el("li", d.severity === "warning" ? "warning" : "error");
      item.textContent = formatDiagnostic(d);
      item.addEventListener("click", () => highlight(d));
      diagnosticsList.append(item);
    }
    if (state.diagnostics.length > 0) highlight(state.diagnostics[0]);

    if (state.svg !== null && state.diagnostics.length === 0) {
      resultBox.innerHTML = state.svg;
      downloadLink.href = URL.createObjectURL(new Blob([state.svg], { type: "image/svg+xml" }));
      downloadLink.classList.remove("hidden");
    }

    tableList.innerHTML = "";
    for (const schema of state.tables) {
      const item = el("li", "table-entry");
      const caption = el("details");
      const name = el("summary", "", `${schema.name} (${schema.columns.length})`);
      caption.append(name);
      for (const column of schema.columns) {
        const colNode = el("div", "column", `${column.name}: ${column.type}`);
        colNode.addEventListener("click", () => {
          const inserted = insertAt(
            textarea.value, textarea.selectionStart ?? textarea.value.length, column.name,
          );
          textarea.value = inserted.text;
          textarea.setSelectionRange(inserted.cursor, inserted.cursor);
          textarea.focus();
          refreshGutter();
        });
        caption.append(colNode);
      }
      item.append(caption);
      tableList.append(item);
    }
    if (state.tables.length === 0) {
      tableList.append(el("li", "empty", "no tables - upload a csv to begin"));
    }

    renderHistory();
  });

  renderHistory();
  void controller.refreshTables();
}
