/** Client-side mirror of the service session state machine. The generate
 * control stays locked until the checklist is empty AND the user approved
 * the previewed path, so the 409 path is unreachable through the UI. */

import type { LoopResultJson, SessionView } from "./types.js";

export interface AppState {
    session: SessionView | null;
    previewShown: boolean;
    result: LoopResultJson | null;
    busy: boolean;
}

export function initialState(): AppState {
    return { session: null, previewShown: false, result: null, busy: false };
}

export function canPreview(state: AppState): boolean {
    return state.session !== null && state.session.missing.length === 0;
}

export function canGenerate(state: AppState): boolean {
    return (
        state.session !== null &&
        state.session.missing.length === 0 &&
        state.session.verified &&
        !state.busy
    );
}

export function canDownload(state: AppState): boolean {
    return state.result !== null && state.result.success;
}
