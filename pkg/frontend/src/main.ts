import { ApiClient } from "./api.js";
import { mountConsole } from "./app.js";
import { ConsoleController } from "./controller.js";
import { SessionHistory } from "./history.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app element");

const controller = new ConsoleController(new ApiClient(""), new SessionHistory());
mountConsole(root, controller);
