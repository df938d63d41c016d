/** The 11-field parameter form. Field names match the service schema
 * exactly; missing fields are highlighted and editable, populated ones
 * are shown read-only (the service never overwrites them anyway). */

import { FIELD_NAMES, type FieldName, type ParamsModel } from "./types.js";

const NUMERIC_FIELDS: FieldName[] = ["depth_of_cut", "feed_rate", "spindle_speed"];
const TUPLE_FIELDS: FieldName[] = ["workpiece_dims", "starting_point", "home_position", "tool_path"];

function displayValue(value: unknown): string {
    if (value === null || value === undefined) return "";
    if (typeof value === "string") return value;
    if (typeof value === "boolean") return value ? "true" : "false";
    return JSON.stringify(value);
}

/** Parse one form input back into its JSON field value. */
export function parseFieldInput(name: FieldName, raw: string): unknown {
    const text = raw.trim();
    if (text === "") return null;
    if (NUMERIC_FIELDS.includes(name)) {
        const num = Number(text);
        if (Number.isNaN(num)) throw new Error(`${name} must be a number`);
        return num;
    }
    if (name === "return_home") {
        if (["true", "yes", "1"].includes(text.toLowerCase())) return true;
        if (["false", "no", "0"].includes(text.toLowerCase())) return false;
        throw new Error("return_home must be yes or no");
    }
    if (TUPLE_FIELDS.includes(name)) {
        try {
            return JSON.parse(text);
        } catch {
            throw new Error(`${name} must be JSON, e.g. [50, 50, 10]`);
        }
    }
    return text;
}

export class ParamsForm {
    readonly element: HTMLElement;
    private inputs = new Map<FieldName, HTMLInputElement>();
    private submitButton: HTMLButtonElement;
    private errorBox: HTMLElement;

    constructor(private onSubmit: (answers: Record<string, unknown>) => void) {
        this.element = document.createElement("form");
        this.element.className = "params-form";
        this.submitButton = document.createElement("button");
        this.submitButton.type = "submit";
        this.submitButton.textContent = "Fill missing parameters";
        this.errorBox = document.createElement("p");
        this.errorBox.className = "form-error";
        this.element.addEventListener("submit", (event) => {
            event.preventDefault();
            this.submit();
        });
    }

    render(params: ParamsModel, missing: FieldName[]): void {
        this.element.textContent = "";
        this.inputs.clear();
        for (const name of FIELD_NAMES) {
            const row = document.createElement("label");
            row.className = "field-row";
            const caption = document.createElement("span");
            caption.textContent = name;
            const input = document.createElement("input");
            input.name = name;
            input.value = displayValue(params[name]);
            if (missing.includes(name)) {
                row.classList.add("missing");
                input.placeholder = "required";
            } else {
                input.readOnly = true;
            }
            row.append(caption, input);
            this.element.append(row);
            this.inputs.set(name, input);
        }
        this.element.append(this.errorBox, this.submitButton);
        this.submitButton.disabled = missing.length === 0;
    }

    private submit(): void {
        const answers: Record<string, unknown> = {};
        try {
            for (const [name, input] of this.inputs) {
                if (input.readOnly) continue;
                const value = parseFieldInput(name, input.value);
                if (value !== null) answers[name] = value;
            }
        } catch (err) {
            this.errorBox.textContent = (err as Error).message;
            return;
        }
        this.errorBox.textContent = "";
        this.onSubmit(answers);
    }

    showError(message: string): void {
        this.errorBox.textContent = message;
    }
}
