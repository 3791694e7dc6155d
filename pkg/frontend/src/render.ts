/**
 * Canvas drawing. Pure painting over the scene + static stage data; no
 * game logic here.
 */

import type { CubeView, TankView } from "./protocol.js";
import { dotPositions } from "./scene.js";

export const LIQUID_COLORS: Record<string, string> = {
    water: "#4a90d9",
    oil: "#d9a441",
    quicksilver: "#a7adb5",
};

export interface Rect {
    x: number;
    y: number;
    w: number;
    h: number;
}

export interface TankLayout {
    tank: TankView;
    rect: Rect; // inner liquid area; rect.y is the liquid surface
}

export const CUBE_SPRITE = 56; // px, drawn size of every cube face

export function cubeFillColor(dotLevel: number): string {
    return "#e8d8b0";
}

export function drawCube(
    ctx: CanvasRenderingContext2D,
    x: number,
    y: number,
    cube: CubeView,
    highlighted = false,
): void {
    ctx.save();
    ctx.fillStyle = cubeFillColor(cube.dot_level);
    ctx.strokeStyle = highlighted ? "#ffffff" : "#4f3f22";
    ctx.lineWidth = highlighted ? 3 : 1.5;
    ctx.fillRect(x, y, CUBE_SPRITE, CUBE_SPRITE);
    ctx.strokeRect(x, y, CUBE_SPRITE, CUBE_SPRITE);
    ctx.fillStyle = "#2d2419";
    for (const dot of dotPositions(cube.dot_level, CUBE_SPRITE)) {
        ctx.beginPath();
        ctx.arc(x + dot.x, y + dot.y, 2.5, 0, Math.PI * 2);
        ctx.fill();
    }
    ctx.fillStyle = "#4f3f22";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(cube.id, x + CUBE_SPRITE / 2, y + CUBE_SPRITE + 12);
    ctx.restore();
}

export function drawTank(
    ctx: CanvasRenderingContext2D,
    layout: TankLayout,
    densityTexture: boolean,
): void {
    const { rect, tank } = layout;
    ctx.save();
    // glass walls
    ctx.strokeStyle = "#cfd8e3";
    ctx.lineWidth = 3;
    ctx.strokeRect(rect.x - 4, rect.y - 26, rect.w + 8, rect.h + 30);
    // liquid
    ctx.fillStyle = LIQUID_COLORS[tank.id] ?? "#7f8ea3";
    ctx.globalAlpha = 0.85;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    ctx.globalAlpha = 1;
    if (densityTexture) {
        // optional, off by default: encode liquid density like cube dots
        ctx.fillStyle = "rgba(255,255,255,0.5)";
        const dots = Math.max(1, Math.round(tank.density_g_cm3 * 10));
        for (const dot of dotPositions(Math.min(dots, 140), Math.min(rect.w, rect.h))) {
            ctx.beginPath();
            ctx.arc(rect.x + dot.x, rect.y + dot.y, 1.5, 0, Math.PI * 2);
            ctx.fill();
        }
    }
    ctx.fillStyle = "#e8edf4";
    ctx.font = "13px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(tank.name, rect.x + rect.w / 2, rect.y + rect.h + 18);
    ctx.restore();
}

/** y pixel of a cube's top edge for a given submersion depth in cm. */
export function cubeTopY(rect: Rect, tankDepthCm: number, submersionCm: number, cubeEdgeCm: number): number {
    const scale = rect.h / tankDepthCm;
    const bottomY = rect.y + submersionCm * scale;
    return bottomY - cubeEdgeCm * scale;
}

export function drawCubeInTank(
    ctx: CanvasRenderingContext2D,
    layout: TankLayout,
    tankDepthCm: number,
    cube: CubeView,
    submersionCm: number,
): void {
    const edgeCm = Math.cbrt(cube.volume_cm3);
    const scale = layout.rect.h / tankDepthCm;
    const sizePx = Math.max(14, edgeCm * scale);
    const topY = cubeTopY(layout.rect, tankDepthCm, submersionCm, edgeCm);
    const x = layout.rect.x + layout.rect.w / 2 - sizePx / 2;
    ctx.save();
    ctx.fillStyle = cubeFillColor(cube.dot_level);
    ctx.strokeStyle = "#4f3f22";
    ctx.fillRect(x, topY, sizePx, sizePx);
    ctx.strokeRect(x, topY, sizePx, sizePx);
    ctx.fillStyle = "#2d2419";
    for (const dot of dotPositions(cube.dot_level, sizePx)) {
        ctx.beginPath();
        ctx.arc(x + dot.x, topY + dot.y, Math.max(1.5, sizePx / 28), 0, Math.PI * 2);
        ctx.fill();
    }
    ctx.restore();
}

export function drawBalance(
    ctx: CanvasRenderingContext2D,
    rect: Rect,
    reading: string | null,
    leftLabel: string | null,
    rightLabel: string | null,
): void {
    ctx.save();
    const centerX = rect.x + rect.w / 2;
    const baseY = rect.y + rect.h - 8;
    const tilt = reading === "left_heavier" ? 0.12 : reading === "right_heavier" ? -0.12 : 0;
    ctx.strokeStyle = "#888";
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(centerX, baseY);
    ctx.lineTo(centerX, baseY - 36);
    ctx.stroke();
    ctx.translate(centerX, baseY - 36);
    ctx.rotate(tilt);
    ctx.beginPath();
    ctx.moveTo(-rect.w / 2 + 12, 0);
    ctx.lineTo(rect.w / 2 - 12, 0);
    ctx.stroke();
    ctx.lineWidth = 2;
    for (const side of [-1, 1]) {
        const panX = side * (rect.w / 2 - 12);
        ctx.beginPath();
        ctx.moveTo(panX, 0);
        ctx.lineTo(panX - 10, 16);
        ctx.moveTo(panX, 0);
        ctx.lineTo(panX + 10, 16);
        ctx.stroke();
        ctx.beginPath();
        ctx.arc(panX, 20, 12, Math.PI, 0, true);
        ctx.stroke();
    }
    ctx.fillStyle = "#e8edf4";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    if (leftLabel) ctx.fillText(leftLabel, -rect.w / 2 + 12, 44);
    if (rightLabel) ctx.fillText(rightLabel, rect.w / 2 - 12, 44);
    ctx.restore();
}

export function wrapText(ctx: CanvasRenderingContext2D, text: string, maxWidth: number): string[] {
    const words = text.split(" ");
    const lines: string[] = [];
    let current = "";
    for (const word of words) {
        const candidate = current ? `${current} ${word}` : word;
        if (ctx.measureText(candidate).width > maxWidth && current) {
            lines.push(current);
            current = word;
        } else {
            current = candidate;
        }
    }
    if (current) {
        lines.push(current);
    }
    return lines;
}

export function drawBlackboard(ctx: CanvasRenderingContext2D, rect: Rect, title: string, text: string): void {
    ctx.save();
    ctx.fillStyle = "#25432e";
    ctx.strokeStyle = "#8a6b3f";
    ctx.lineWidth = 5;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    ctx.fillStyle = "#f2f0d8";
    ctx.font = "bold 15px sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(title, rect.x + 14, rect.y + 26);
    ctx.font = "12px sans-serif";
    let y = rect.y + 48;
    for (const line of wrapText(ctx, text, rect.w - 28)) {
        if (y > rect.y + rect.h - 10) {
            break;
        }
        ctx.fillText(line, rect.x + 14, y);
        y += 16;
    }
    ctx.restore();
}
