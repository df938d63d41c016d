/** Iteration trace cards and the final G-code viewer. */

import type { IterationJson, LoopResultJson } from "./types.js";

function iterationCard(record: IterationJson): HTMLElement {
    const card = document.createElement("div");
    card.className = "iteration-card";
    const title = document.createElement("h4");
    title.textContent = `Attempt ${record.attempt}`;
    card.append(title);

    const status = document.createElement("p");
    if (record.report && !record.report.passed) {
        status.textContent = "validation failed";
        card.classList.add("failed");
        const list = document.createElement("ul");
        for (const diag of record.report.diagnostics) {
            const li = document.createElement("li");
            li.className = "diagnostic";
            li.textContent = `LINE ${diag.line_no}: ${diag.rule}: ${diag.message}`;
            list.append(li);
        }
        card.append(status, list);
    } else if (record.functional) {
        const d = record.functional.distance;
        status.textContent = `Hausdorff d=${d.toFixed(6)} (${record.functional.message})`;
        status.className = "hausdorff";
        card.classList.add(record.functional.matched ? "matched" : "failed");
        card.append(status);
    } else {
        status.textContent = record.feedback || "no G-code produced";
        card.classList.add("failed");
        card.append(status);
    }
    return card;
}

export class TracePanel {
    readonly element: HTMLElement;
    private cards: HTMLElement;
    private viewer: HTMLPreElement;
    private downloadButton: HTMLButtonElement;

    constructor(onDownload: () => void) {
        this.element = document.createElement("section");
        this.element.className = "trace-panel";
        this.cards = document.createElement("div");
        this.cards.className = "iteration-cards";
        this.viewer = document.createElement("pre");
        this.viewer.className = "gcode-viewer";
        this.downloadButton = document.createElement("button");
        this.downloadButton.className = "download";
        this.downloadButton.textContent = "Download G-code";
        this.downloadButton.disabled = true;
        this.downloadButton.addEventListener("click", onDownload);
        this.element.append(this.cards, this.viewer, this.downloadButton);
    }

    render(result: LoopResultJson): void {
        this.cards.textContent = "";
        for (const record of result.trace) {
            this.cards.append(iterationCard(record));
        }
        this.viewer.textContent = result.final_gcode ?? "";
        this.downloadButton.disabled = !result.success;
    }

    clear(): void {
        this.cards.textContent = "";
        this.viewer.textContent = "";
        this.downloadButton.disabled = true;
    }
}
