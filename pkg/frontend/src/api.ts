/** Pure API client for the session service. No geometry, no validation:
 * everything the UI shows comes back from these endpoints verbatim. */

import type { ApiErrorBody, LoopResultJson, PreviewJson, SessionView } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
    status: number;
    body: ApiErrorBody | null;

    constructor(status: number, body: ApiErrorBody | null) {
        super(body ? `${body.error}: ${body.detail}` : `HTTP ${status}`);
        this.status = status;
        this.body = body;
    }
}

export interface GenerateOptions {
    generator?: string;
    max_iterations?: number;
    tolerance?: number;
}

export class ApiClient {
    private baseUrl: string;
    private fetchFn: FetchLike;

    constructor(baseUrl: string, fetchFn?: FetchLike) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
        this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
        if (body !== undefined) {
            init.body = JSON.stringify(body);
        }
        const resp = await this.fetchFn(this.baseUrl + path, init);
        if (!resp.ok) {
            let parsed: ApiErrorBody | null = null;
            try {
                parsed = (await resp.json()) as ApiErrorBody;
            } catch {
                parsed = null;
            }
            throw new ApiRequestError(resp.status, parsed);
        }
        return (await resp.json()) as T;
    }

    createSession(description: string): Promise<SessionView> {
        return this.request<SessionView>("POST", "/sessions", { description });
    }

    patchParams(id: string, answers: Record<string, unknown>): Promise<{ params: SessionView["params"]; missing: SessionView["missing"] }> {
        return this.request("PATCH", `/sessions/${id}/params`, { answers });
    }

    preview(id: string): Promise<PreviewJson> {
        return this.request<PreviewJson>("GET", `/sessions/${id}/preview`);
    }

    verify(id: string, approved: boolean): Promise<{ verified: boolean }> {
        return this.request("POST", `/sessions/${id}/verify`, { approved });
    }

    generate(id: string, options: GenerateOptions = {}): Promise<LoopResultJson> {
        return this.request<LoopResultJson>("POST", `/sessions/${id}/generate`, {
            generator: options.generator ?? "template",
            ...("max_iterations" in options ? { max_iterations: options.max_iterations } : {}),
            ...("tolerance" in options ? { tolerance: options.tolerance } : {}),
        });
    }

    async downloadGcode(id: string): Promise<string> {
        const resp = await this.fetchFn(`${this.baseUrl}/sessions/${id}/gcode`, { method: "GET" });
        if (!resp.ok) {
            let parsed: ApiErrorBody | null = null;
            try {
                parsed = (await resp.json()) as ApiErrorBody;
            } catch {
                parsed = null;
            }
            throw new ApiRequestError(resp.status, parsed);
        }
        return resp.text();
    }
}
