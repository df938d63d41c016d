/** Canvas toolpath rendering with zoom and pan.
 *
 * Draws the toolpath JSON verbatim: every segment becomes one stroked
 * line, dashed for rapids and solid for feed moves. No geometry is
 * recomputed client-side; the fit transform only maps millimeters to
 * pixels (Y flipped so +Y points up).
 */

import type { ToolpathJson } from "./types.js";

/** The slice of CanvasRenderingContext2D the renderer needs; tests supply
 * a recording fake, the app passes the real context. */
export interface StrokeContext {
    lineWidth: number;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    clearRect(x: number, y: number, w: number, h: number): void;
    setLineDash(segments: number[]): void;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    stroke(): void;
}

export interface Transform {
    scale: number;
    offsetX: number;
    offsetY: number;
}

export function fitTransform(
    toolpath: ToolpathJson, width: number, height: number, margin = 0.05,
): Transform {
    const xs = toolpath.points.map((p) => p[0]);
    const ys = toolpath.points.map((p) => p[1]);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const spanX = maxX - minX || 1;
    const spanY = maxY - minY || 1;
    const scale = Math.min(
        (width * (1 - 2 * margin)) / spanX,
        (height * (1 - 2 * margin)) / spanY,
    );
    // Center the bounding box; canvas Y grows downward, the shop floor's up.
    const offsetX = width / 2 - scale * (minX + spanX / 2);
    const offsetY = height / 2 + scale * (minY + spanY / 2);
    return { scale, offsetX, offsetY };
}

export function toScreen(t: Transform, x: number, y: number): [number, number] {
    return [t.offsetX + t.scale * x, t.offsetY - t.scale * y];
}

export class PreviewView {
    private toolpath: ToolpathJson | null = null;
    private zoom = 1;
    private panX = 0;
    private panY = 0;

    constructor(
        private ctx: StrokeContext,
        private width: number,
        private height: number,
    ) {}

    setToolpath(toolpath: ToolpathJson): void {
        this.toolpath = toolpath;
        this.zoom = 1;
        this.panX = 0;
        this.panY = 0;
        this.render();
    }

    zoomBy(factor: number): void {
        this.zoom = Math.min(50, Math.max(0.02, this.zoom * factor));
        this.render();
    }

    panBy(dx: number, dy: number): void {
        this.panX += dx;
        this.panY += dy;
        this.render();
    }

    private currentTransform(): Transform {
        if (!this.toolpath) return { scale: 1, offsetX: 0, offsetY: 0 };
        const fit = fitTransform(this.toolpath, this.width, this.height);
        const scale = fit.scale * this.zoom;
        // Keep the canvas center fixed while zooming, then apply the pan.
        return {
            scale,
            offsetX: this.width / 2 + (fit.offsetX - this.width / 2) * this.zoom + this.panX,
            offsetY: this.height / 2 + (fit.offsetY - this.height / 2) * this.zoom + this.panY,
        };
    }

    render(): void {
        const ctx = this.ctx;
        ctx.clearRect(0, 0, this.width, this.height);
        if (!this.toolpath || this.toolpath.points.length < 2) return;
        const t = this.currentTransform();
        ctx.lineWidth = 1.5;
        for (let i = 0; i < this.toolpath.segment_kinds.length; i++) {
            const kind = this.toolpath.segment_kinds[i];
            const [x1, y1] = toScreen(t, ...this.toolpath.points[i]);
            const [x2, y2] = toScreen(t, ...this.toolpath.points[i + 1]);
            ctx.setLineDash(kind === "RAPID" ? [4, 4] : []);
            ctx.strokeStyle = kind === "RAPID" ? "#d62728" : "#1f77b4";
            ctx.beginPath();
            ctx.moveTo(x1, y1);
            ctx.lineTo(x2, y2);
            ctx.stroke();
        }
    }
}
