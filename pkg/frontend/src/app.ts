/** Wires the screens together: description entry, parameter form,
 * toolpath preview with approve/reject, generation trace, download.
 *
 * All decisions come from the service; this file only moves JSON between
 * endpoints and the DOM and keeps the generate control locked until the
 * service would accept the request anyway.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import { ParamsForm } from "./form.js";
import { PreviewView, type StrokeContext } from "./preview.js";
import { canGenerate, canPreview, initialState, type AppState } from "./state.js";
import { TracePanel } from "./trace.js";
import type { SessionView } from "./types.js";

export interface AppOptions {
    /** Supplies a stroke context for the preview canvas; tests inject a
     * recording fake, the browser passes canvas.getContext("2d"). */
    makeContext?: (canvas: HTMLCanvasElement) => StrokeContext | null;
    /** Receives the downloaded program; the browser saves a file. */
    saveFile?: (name: string, text: string) => void;
    canvasSize?: [number, number];
}

export class App {
    state: AppState = initialState();
    preview: PreviewView | null = null;

    private descriptionInput: HTMLTextAreaElement;
    private descriptionButton: HTMLButtonElement;
    private shapeBadge: HTMLElement;
    private errorBanner: HTMLElement;
    private retryBanner: HTMLElement;
    private form: ParamsForm;
    private canvas: HTMLCanvasElement;
    private approveButton: HTMLButtonElement;
    private rejectButton: HTMLButtonElement;
    private verifiedNote: HTMLElement;
    private generatorSelect: HTMLSelectElement;
    private generateButton: HTMLButtonElement;
    private trace: TracePanel;

    constructor(
        root: HTMLElement,
        private api: ApiClient,
        private options: AppOptions = {},
    ) {
        root.textContent = "";

        const descSection = document.createElement("section");
        descSection.className = "description-screen";
        this.descriptionInput = document.createElement("textarea");
        this.descriptionInput.placeholder = "Describe the machining task...";
        this.descriptionButton = document.createElement("button");
        this.descriptionButton.className = "submit-description";
        this.descriptionButton.textContent = "Extract parameters";
        this.descriptionButton.addEventListener("click", () => void this.submitDescription());
        this.shapeBadge = document.createElement("span");
        this.shapeBadge.className = "shape-badge";
        this.errorBanner = document.createElement("p");
        this.errorBanner.className = "error-banner";
        descSection.append(this.descriptionInput, this.descriptionButton,
                           this.shapeBadge, this.errorBanner);

        this.form = new ParamsForm((answers) => void this.submitAnswers(answers));

        const previewSection = document.createElement("section");
        previewSection.className = "preview-panel";
        this.canvas = document.createElement("canvas");
        const [w, h] = options.canvasSize ?? [480, 480];
        this.canvas.width = w;
        this.canvas.height = h;
        const zoomIn = document.createElement("button");
        zoomIn.className = "zoom-in";
        zoomIn.textContent = "+";
        zoomIn.addEventListener("click", () => this.preview?.zoomBy(1.25));
        const zoomOut = document.createElement("button");
        zoomOut.className = "zoom-out";
        zoomOut.textContent = "-";
        zoomOut.addEventListener("click", () => this.preview?.zoomBy(0.8));
        this.canvas.addEventListener("mousemove", (event) => {
            if (event.buttons === 1) this.preview?.panBy(event.movementX, event.movementY);
        });
        this.approveButton = document.createElement("button");
        this.approveButton.className = "approve";
        this.approveButton.textContent = "Approve path";
        this.approveButton.disabled = true;
        this.approveButton.addEventListener("click", () => void this.setApproval(true));
        this.rejectButton = document.createElement("button");
        this.rejectButton.className = "reject";
        this.rejectButton.textContent = "Reject";
        this.rejectButton.disabled = true;
        this.rejectButton.addEventListener("click", () => void this.setApproval(false));
        this.verifiedNote = document.createElement("span");
        this.verifiedNote.className = "verified-note";
        previewSection.append(this.canvas, zoomIn, zoomOut,
                              this.approveButton, this.rejectButton, this.verifiedNote);

        const genSection = document.createElement("section");
        genSection.className = "generation-panel";
        this.generatorSelect = document.createElement("select");
        this.generatorSelect.className = "generator-select";
        for (const name of ["template", "fault-once:syntax", "remote"]) {
            const option = document.createElement("option");
            option.value = name;
            option.textContent = name;
            this.generatorSelect.append(option);
        }
        this.generateButton = document.createElement("button");
        this.generateButton.className = "generate";
        this.generateButton.textContent = "Generate G-code";
        this.generateButton.disabled = true;
        this.generateButton.addEventListener("click", () => void this.generate());
        this.retryBanner = document.createElement("p");
        this.retryBanner.className = "retry-banner";
        this.trace = new TracePanel(() => void this.download());
        genSection.append(this.generatorSelect, this.generateButton,
                          this.retryBanner, this.trace.element);

        root.append(descSection, this.form.element, previewSection, genSection);
    }

    private showError(message: string): void {
        this.errorBanner.textContent = message;
    }

    private updateSession(session: SessionView): void {
        this.state.session = session;
        this.form.render(session.params, session.missing);
        this.shapeBadge.textContent =
            session.shape_count > 1 ? `${session.shape_count} shapes detected` : "";
        this.sync();
    }

    private sync(): void {
        const previewReady = this.state.previewShown;
        this.approveButton.disabled = !previewReady;
        this.rejectButton.disabled = !previewReady;
        this.generateButton.disabled = !canGenerate(this.state);
        this.verifiedNote.textContent = this.state.session?.verified
            ? "path approved" : "";
    }

    async submitDescription(): Promise<void> {
        this.showError("");
        this.trace.clear();
        this.state = initialState();
        try {
            const session = await this.api.createSession(this.descriptionInput.value);
            this.updateSession(session);
            if (canPreview(this.state)) await this.loadPreview();
        } catch (err) {
            this.showError((err as Error).message);
            this.sync();
        }
    }

    async submitAnswers(answers: Record<string, unknown>): Promise<void> {
        const session = this.state.session;
        if (!session) return;
        try {
            const updated = await this.api.patchParams(session.id, answers);
            this.updateSession({ ...session, params: updated.params, missing: updated.missing });
            if (canPreview(this.state)) await this.loadPreview();
        } catch (err) {
            this.form.showError((err as Error).message);
        }
    }

    async loadPreview(): Promise<void> {
        const session = this.state.session;
        if (!session) return;
        try {
            const data = await this.api.preview(session.id);
            const make = this.options.makeContext
                ?? ((canvas: HTMLCanvasElement) => canvas.getContext("2d"));
            const ctx = make(this.canvas);
            if (ctx) {
                this.preview = new PreviewView(ctx, this.canvas.width, this.canvas.height);
                this.preview.setToolpath(data.toolpath);
            }
            this.state.previewShown = true;
            this.sync();
        } catch (err) {
            this.showError((err as Error).message);
        }
    }

    async setApproval(approved: boolean): Promise<void> {
        const session = this.state.session;
        if (!session) return;
        const result = await this.api.verify(session.id, approved);
        this.updateSession({ ...session, verified: result.verified });
    }

    async generate(): Promise<void> {
        const session = this.state.session;
        if (!session || !canGenerate(this.state)) return;
        this.retryBanner.textContent = "";
        this.state.busy = true;
        this.sync();
        try {
            const result = await this.api.generate(session.id, {
                generator: this.generatorSelect.value,
            });
            this.state.result = result;
            this.trace.render(result);
        } catch (err) {
            if (err instanceof ApiRequestError && err.status === 502) {
                this.retryBanner.textContent =
                    "generator unavailable - check the endpoint and retry";
            } else {
                this.showError((err as Error).message);
            }
        } finally {
            this.state.busy = false;
            this.sync();
        }
    }

    async download(): Promise<void> {
        const session = this.state.session;
        if (!session || !this.state.result?.success) return;
        const text = await this.api.downloadGcode(session.id);
        const save = this.options.saveFile ?? (() => undefined);
        save("program.gcode", text);
    }
}
