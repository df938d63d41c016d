import { ApiClient } from "./api.js";
import { App } from "./app.js";

declare global {
    interface Window {
        GCODEGEN_API_BASE?: string;
    }
}

const apiBase = window.GCODEGEN_API_BASE ?? "http://127.0.0.1:8080";

function saveFile(name: string, text: string): void {
    const blob = new Blob([text], { type: "text/plain" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = name;
    anchor.click();
    URL.revokeObjectURL(url);
}

const root = document.getElementById("app");
if (root) {
    new App(root, new ApiClient(apiBase), { saveFile });
}
