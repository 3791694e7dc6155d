/**
 * Pure scene state, derived from the session event log and nothing else.
 *
 * The UI holds no authoritative state: the scene is a fold over the log
 * lines the engine wrote, so refreshing the page and replaying the log
 * reconstructs the identical scene. Outcome animations are gated on a
 * logged prediction event; a stream that shows an outcome before its
 * prediction is a protocol violation and halts the session.
 */

import type { StateView, TrajectoryPoint } from "./protocol.js";

export const SCORED_STAGES = ["c1", "c2", "c3"];
export const DROP_STAGES = ["c1", "c2", "c3", "bonus"];
export const STAGE_TITLES: Record<string, string> = {
    pre_test: "Pre-test",
    training: "Training",
    c1: "Scenario 1",
    c2: "Scenario 2",
    c3: "Scenario 3",
    bonus: "Bonus",
    post_test: "Post-test",
};

export interface LogEvent {
    seq: number;
    t_ms: number;
    stage: string;
    kind: string;
    payload: Record<string, any>;
}

export interface PredictionRecord {
    stage: string;
    cubeId: string;
    tankId: string;
    prediction: string | null;
}

export interface OutcomeRecord {
    stage: string;
    cubeId: string;
    tankId: string;
    observed: string;
    scoreDelta: number;
    surfaceBreach: boolean;
}

export interface BalanceRecord {
    left: string;
    right: string;
    reading: string;
}

export interface SceneState {
    stage: string;
    score: number;
    finalized: boolean;
    halted: boolean;
    errorBanner: string | null;
    predictions: PredictionRecord[];
    outcomes: OutcomeRecord[];
    lastBalance: BalanceRecord | null;
    answered: Record<string, string[]>; // test kind -> answered item ids, in order
}

export interface DropAnimation {
    cubeId: string;
    tankId: string;
    trajectory: TrajectoryPoint[];
    startedAtMs: number;
}

export function pairKey(cubeId: string, tankId: string): string {
    return `${cubeId}|${tankId}`;
}

export function initialScene(): SceneState {
    return {
        stage: "pre_test",
        score: 0,
        finalized: false,
        halted: false,
        errorBanner: null,
        predictions: [],
        outcomes: [],
        lastBalance: null,
        answered: {},
    };
}

function halt(scene: SceneState, reason: string): SceneState {
    return { ...scene, halted: true, errorBanner: reason };
}

export function applyEvent(scene: SceneState, event: LogEvent): SceneState {
    if (scene.halted) {
        return scene;
    }
    switch (event.kind) {
        case "stage_enter":
            return { ...scene, stage: event.stage, lastBalance: null };
        case "stage_exit":
            return event.stage === "post_test" ? { ...scene, finalized: true } : scene;
        case "prediction_submitted": {
            const record: PredictionRecord = {
                stage: event.stage,
                cubeId: event.payload.cube_id,
                tankId: event.payload.tank_id,
                prediction: event.payload.prediction ?? null,
            };
            if (SCORED_STAGES.includes(event.stage) && record.prediction === null) {
                return halt(scene, "protocol violation: empty prediction in a scored stage");
            }
            return { ...scene, predictions: [...scene.predictions, record] };
        }
        case "outcome_observed": {
            const key = pairKey(event.payload.cube_id, event.payload.tank_id);
            const predicted = scene.predictions.some(
                (p) => p.stage === event.stage && pairKey(p.cubeId, p.tankId) === key,
            );
            if (!predicted) {
                return halt(scene, "protocol violation: outcome observed without a prediction event");
            }
            const record: OutcomeRecord = {
                stage: event.stage,
                cubeId: event.payload.cube_id,
                tankId: event.payload.tank_id,
                observed: event.payload.observed,
                scoreDelta: event.payload.score_delta,
                surfaceBreach: Boolean(event.payload.surface_breach),
            };
            return { ...scene, outcomes: [...scene.outcomes, record], score: event.payload.score };
        }
        case "balance_used":
            return {
                ...scene,
                lastBalance: {
                    left: event.payload.left,
                    right: event.payload.right,
                    reading: event.payload.reading,
                },
            };
        case "item_answered": {
            const test = event.payload.test as string;
            const ids = scene.answered[test] ?? [];
            return { ...scene, answered: { ...scene.answered, [test]: [...ids, event.payload.item_id] } };
        }
        default:
            return halt(scene, `protocol violation: unknown event kind ${event.kind}`);
    }
}

export function parseLogLine(line: string): LogEvent {
    return JSON.parse(line) as LogEvent;
}

/** Rebuild the whole scene from a state snapshot (page load / refresh). */
export function buildScene(view: StateView): SceneState {
    let scene = initialScene();
    for (const line of view.log) {
        scene = applyEvent(scene, parseLogLine(line));
    }
    return scene;
}

/** Cubes already dropped in the given tank this stage, with their outcomes. */
export function outcomesInTank(scene: SceneState, stage: string, tankId: string): OutcomeRecord[] {
    return scene.outcomes.filter((o) => o.stage === stage && o.tankId === tankId);
}

export function isTested(scene: SceneState, stage: string, cubeId: string, tankId: string): boolean {
    return scene.outcomes.some(
        (o) => o.stage === stage && pairKey(o.cubeId, o.tankId) === pairKey(cubeId, tankId),
    );
}

export type DropDecision =
    | { action: "prompt" } // scored stage: collect a prediction first
    | { action: "submit"; prediction: null } // bonus: no prediction, drop immediately
    | { action: "blocked"; reason: string };

/** What a cube-on-tank drop gesture is allowed to do in the current stage. */
export function dropAttempt(scene: SceneState, cubeId: string, tankId: string): DropDecision {
    if (scene.halted || scene.finalized) {
        return { action: "blocked", reason: "session is over" };
    }
    if (!DROP_STAGES.includes(scene.stage)) {
        return { action: "blocked", reason: "nothing to test in this stage" };
    }
    if (isTested(scene, scene.stage, cubeId, tankId)) {
        return { action: "blocked", reason: "this cube was already tested in that tank" };
    }
    if (SCORED_STAGES.includes(scene.stage)) {
        return { action: "prompt" };
    }
    return { action: "submit", prediction: null };
}

/**
 * Start the drop animation for a just-submitted trial. The scene must
 * already contain the logged prediction event for the pair; in scored
 * stages an outcome animation without one is unreachable by construction.
 */
export function startDropAnimation(
    scene: SceneState,
    cubeId: string,
    tankId: string,
    trajectory: TrajectoryPoint[],
    nowMs: number,
): DropAnimation {
    const key = pairKey(cubeId, tankId);
    const predicted = scene.predictions.some(
        (p) => p.stage === scene.stage && pairKey(p.cubeId, p.tankId) === key,
    );
    if (!predicted) {
        throw new Error("outcome animation requires a logged prediction event");
    }
    if (trajectory.length === 0) {
        throw new Error("empty trajectory");
    }
    return { cubeId, tankId, trajectory, startedAtMs: nowMs };
}

/** Interpolated submersion (cm) at a wall-clock instant of the animation. */
export function animatedSubmersion(animation: DropAnimation, nowMs: number): number {
    const t = Math.max(0, (nowMs - animation.startedAtMs) / 1000);
    const samples = animation.trajectory;
    const last = samples[samples.length - 1];
    if (t >= last.t) {
        return last.submersion;
    }
    let low = 0;
    let high = samples.length - 1;
    while (high - low > 1) {
        const mid = (low + high) >> 1;
        if (samples[mid].t <= t) {
            low = mid;
        } else {
            high = mid;
        }
    }
    const a = samples[low];
    const b = samples[high];
    const span = b.t - a.t;
    const alpha = span > 0 ? (t - a.t) / span : 0;
    return a.submersion + alpha * (b.submersion - a.submersion);
}

export function animationDone(animation: DropAnimation, nowMs: number): boolean {
    const last = animation.trajectory[animation.trajectory.length - 1];
    return (nowMs - animation.startedAtMs) / 1000 >= last.t;
}

/**
 * Deterministic dot placement for a cube face: exactly `dotLevel` dots on
 * a near-square grid. The sprite's dot count must equal the engine's
 * dot_level, which is what the tests pin down.
 */
export function dotPositions(dotLevel: number, size: number): { x: number; y: number }[] {
    if (dotLevel <= 0) {
        return [];
    }
    const columns = Math.ceil(Math.sqrt(dotLevel));
    const rows = Math.ceil(dotLevel / columns);
    const positions: { x: number; y: number }[] = [];
    for (let index = 0; index < dotLevel; index++) {
        const row = Math.floor(index / columns);
        const inRow = row === rows - 1 ? dotLevel - columns * (rows - 1) : columns;
        const column = index % columns;
        positions.push({
            x: ((column + 1) / (inRow + 1)) * size,
            y: ((row + 1) / (rows + 1)) * size,
        });
    }
    return positions;
}

/** Items still unanswered in the active test stage, in presentation order. */
export function remainingItems(scene: SceneState, itemIds: string[]): string[] {
    const test = scene.stage === "pre_test" ? "pre" : "post";
    const done = new Set(scene.answered[test] ?? []);
    return itemIds.filter((id) => !done.has(id));
}
