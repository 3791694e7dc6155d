/**
 * App wiring: one canvas scene driven entirely by the engine protocol.
 *
 * Every user gesture turns into a protocol command; every pixel is drawn
 * from the engine's state snapshot and event log. The only local
 * computation is interpolating the engine-provided drop trajectory.
 */

import { Client, ProtocolError, StateView, StageView, CubeView, TrajectoryPoint } from "./protocol.js";
import {
    DropAnimation,
    SceneState,
    STAGE_TITLES,
    animatedSubmersion,
    animationDone,
    buildScene,
    dropAttempt,
    isTested,
    outcomesInTank,
    remainingItems,
    startDropAnimation,
} from "./scene.js";
import {
    CUBE_SPRITE,
    Rect,
    TankLayout,
    drawBalance,
    drawBlackboard,
    drawCube,
    drawCubeInTank,
    drawTank,
} from "./render.js";

const canvas = document.getElementById("game") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

const scoreEl = document.getElementById("score")!;
const stageEl = document.getElementById("stage-name")!;
const noticeEl = document.getElementById("notice")!;
const bannerEl = document.getElementById("banner")!;
const advanceButton = document.getElementById("advance") as HTMLButtonElement;
const downloadLink = document.getElementById("download-log") as HTMLAnchorElement;
const textureToggle = document.getElementById("liquid-texture") as HTMLInputElement;
const predictionDialog = document.getElementById("prediction-dialog")!;
const assessmentPanel = document.getElementById("assessment")!;
const finishedPanel = document.getElementById("finished")!;

interface AnimatingDrop {
    animation: DropAnimation;
    cube: CubeView;
    tankId: string;
}

interface AppState {
    client: Client;
    view: StateView | null;
    scene: SceneState;
    drag: { cube: CubeView; x: number; y: number } | null;
    balanceSelection: string[];
    pendingDrop: { cubeId: string; tankId: string } | null;
    drop: AnimatingDrop | null;
    assessmentChoice: number | null;
    assessmentConfidence: number | null;
}

const app: AppState = {
    client: new Client(),
    view: null,
    scene: {
        stage: "pre_test",
        score: 0,
        finalized: false,
        halted: false,
        errorBanner: null,
        predictions: [],
        outcomes: [],
        lastBalance: null,
        answered: {},
    },
    drag: null,
    balanceSelection: [],
    pendingDrop: null,
    drop: null,
    assessmentChoice: null,
    assessmentConfidence: null,
};

function fatal(message: string): void {
    bannerEl.textContent = `Session halted: ${message}`;
    bannerEl.classList.remove("hidden");
}

function notice(message: string): void {
    noticeEl.textContent = message;
    noticeEl.classList.remove("hidden");
    window.setTimeout(() => noticeEl.classList.add("hidden"), 4000);
}

async function refresh(): Promise<void> {
    try {
        app.view = await app.client.state();
        app.scene = buildScene(app.view);
    } catch (error) {
        fatal(error instanceof Error ? error.message : String(error));
        return;
    }
    if (app.scene.halted) {
        fatal(app.scene.errorBanner ?? "protocol violation");
    }
    updatePanels();
}

function stageView(): StageView | null {
    if (!app.view) {
        return null;
    }
    return app.view.stages[app.scene.stage] ?? null;
}

function isTestStage(): boolean {
    return app.scene.stage === "pre_test" || app.scene.stage === "post_test";
}

function updatePanels(): void {
    const view = stageView();
    stageEl.textContent = STAGE_TITLES[app.scene.stage] ?? app.scene.stage;
    const scored = view?.scored ?? false;
    scoreEl.textContent = `Score: ${app.scene.score}`;
    scoreEl.classList.toggle("hidden", isTestStage());
    downloadLink.href = app.client.logUrl();
    if (app.scene.finalized) {
        assessmentPanel.classList.add("hidden");
        finishedPanel.classList.remove("hidden");
        finishedPanel.querySelector("p")!.textContent =
            `All done. Final score: ${app.scene.score}. Thanks for playing!`;
        advanceButton.disabled = true;
        return;
    }
    advanceButton.disabled = false;
    if (isTestStage()) {
        renderAssessment();
    } else {
        assessmentPanel.classList.add("hidden");
    }
}

// --- assessment view ----------------------------------------------------------

function renderAssessment(): void {
    const view = stageView();
    if (!view || !view.items) {
        return;
    }
    const itemIds = view.items.map((item) => item.item_id);
    const remaining = remainingItems(app.scene, itemIds);
    assessmentPanel.classList.remove("hidden");
    if (remaining.length === 0) {
        assessmentPanel.innerHTML =
            "<p>All questions answered. Press Continue on the blackboard side to move on.</p>";
        return;
    }
    const item = view.items.find((candidate) => candidate.item_id === remaining[0])!;
    const answeredCount = itemIds.length - remaining.length;
    const options = item.options
        .map(
            (text, index) =>
                `<label><input type="radio" name="option" value="${index}" ${
                    app.assessmentChoice === index ? "checked" : ""
                }> ${text}</label>`,
        )
        .join("");
    const confidence = [1, 2, 3, 4]
        .map(
            (level) =>
                `<button class="confidence ${app.assessmentConfidence === level ? "selected" : ""}" data-level="${level}">${level}</button>`,
        )
        .join("");
    assessmentPanel.innerHTML = `
        <div class="progress">Question ${answeredCount + 1} of ${itemIds.length}</div>
        <h3>${item.prompt}</h3>
        <div class="options">${options}</div>
        <div class="confidence-row">
            <span>How confident are you? 1 = guessing, 4 = certain</span>
            <div>${confidence}</div>
        </div>
        <button id="submit-answer" disabled>Answer</button>
    `;
    const submit = assessmentPanel.querySelector("#submit-answer") as HTMLButtonElement;
    const update = () => {
        submit.disabled = app.assessmentChoice === null || app.assessmentConfidence === null;
    };
    assessmentPanel.querySelectorAll("input[name=option]").forEach((input) =>
        input.addEventListener("change", () => {
            app.assessmentChoice = Number((input as HTMLInputElement).value);
            update();
        }),
    );
    assessmentPanel.querySelectorAll("button.confidence").forEach((button) =>
        button.addEventListener("click", () => {
            app.assessmentConfidence = Number((button as HTMLElement).dataset.level);
            assessmentPanel
                .querySelectorAll("button.confidence")
                .forEach((b) => b.classList.toggle("selected", b === button));
            update();
        }),
    );
    submit.addEventListener("click", async () => {
        if (app.assessmentChoice === null || app.assessmentConfidence === null) {
            return; // both are required before submitting
        }
        const response = await app.client.answerItem(item.item_id, app.assessmentChoice, app.assessmentConfidence);
        if (!response.ok) {
            notice(response.error ?? "rejected");
            return;
        }
        app.assessmentChoice = null;
        app.assessmentConfidence = null;
        await refresh();
    });
    update();
}

// --- layout -------------------------------------------------------------------

const SHELF: Rect = { x: 20, y: 40, w: 200, h: 420 };
const BOARD: Rect = { x: 660, y: 40, w: 280, h: 280 };
const BALANCE: Rect = { x: 660, y: 340, w: 280, h: 120 };

function tankLayouts(): TankLayout[] {
    const view = stageView();
    if (!view || !view.tanks) {
        return [];
    }
    const count = view.tanks.length;
    const areaX = 240;
    const areaW = 400;
    const width = count === 1 ? 240 : 185;
    return view.tanks.map((tank, index) => ({
        tank,
        rect: {
            x: areaX + index * (areaW / count) + (areaW / count - width) / 2,
            y: 120,
            w: width,
            h: 330,
        },
    }));
}

function shelfPosition(index: number): { x: number; y: number } {
    const perRow = 2;
    const col = index % perRow;
    const row = Math.floor(index / perRow);
    return { x: SHELF.x + 18 + col * (CUBE_SPRITE + 32), y: SHELF.y + 20 + row * (CUBE_SPRITE + 34) };
}

// --- rendering loop ----------------------------------------------------------

function draw(): void {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const view = stageView();
    if (!view) {
        requestAnimationFrame(draw);
        return;
    }
    drawBlackboard(ctx, BOARD, STAGE_TITLES[app.scene.stage] ?? app.scene.stage, view.instructions);

    if (!isTestStage() && view.cubes && app.view) {
        const layouts = tankLayouts();
        for (const layout of layouts) {
            drawTank(ctx, layout, textureToggle.checked);
            for (const outcome of outcomesInTank(app.scene, app.scene.stage, layout.tank.id)) {
                if (
                    app.drop &&
                    app.drop.cube.id === outcome.cubeId &&
                    app.drop.tankId === outcome.tankId &&
                    !animationDone(app.drop.animation, performance.now())
                ) {
                    continue; // the animation is still carrying this cube
                }
                const cube = view.cubes.find((c) => c.id === outcome.cubeId)!;
                // resting depth: where the engine's trajectory ended for this pair
                const resting = restingSubmersion(cube, outcome.observed);
                drawCubeInTank(ctx, layout, app.view.tank_depth_cm, cube, resting);
            }
        }
        if (app.drop && app.view) {
            const layout = layouts.find((l) => l.tank.id === app.drop!.tankId);
            if (layout) {
                const submersion = animatedSubmersion(app.drop.animation, performance.now());
                drawCubeInTank(ctx, layout, app.view.tank_depth_cm, app.drop.cube, submersion);
            }
            if (animationDone(app.drop.animation, performance.now())) {
                app.drop = null;
            }
        }
        view.cubes.forEach((cube, index) => {
            const position = shelfPosition(index);
            const fullyTested = tankLayouts().every((layout) =>
                isTested(app.scene, app.scene.stage, cube.id, layout.tank.id),
            );
            ctx.globalAlpha = fullyTested ? 0.35 : 1;
            const selected = app.balanceSelection.includes(cube.id);
            drawCube(ctx, position.x, position.y, cube, selected);
            ctx.globalAlpha = 1;
        });
        if (view.balance) {
            drawBalance(
                ctx,
                BALANCE,
                app.scene.lastBalance?.reading ?? null,
                app.scene.lastBalance?.left ?? app.balanceSelection[0] ?? null,
                app.scene.lastBalance?.right ?? app.balanceSelection[1] ?? null,
            );
        }
        if (app.drag) {
            drawCube(ctx, app.drag.x - CUBE_SPRITE / 2, app.drag.y - CUBE_SPRITE / 2, app.drag.cube, true);
        }
    }
    requestAnimationFrame(draw);
}

/**
 * Final rest depth used once the animation finished: the last trajectory
 * sample when we animated this pair, else derived from the observed
 * outcome for pairs restored from the log after a refresh.
 */
const lastTrajectory = new Map<string, TrajectoryPoint[]>();

function restingSubmersion(cube: CubeView, observed: string): number {
    const key = `${app.scene.stage}|${cube.id}`;
    const trajectory = lastTrajectory.get(key);
    if (trajectory && trajectory.length > 0) {
        return trajectory[trajectory.length - 1].submersion;
    }
    const edge = Math.cbrt(cube.volume_cm3);
    const depth = app.view?.tank_depth_cm ?? 50;
    if (observed === "sinks") {
        return depth;
    }
    if (observed === "suspends") {
        return Math.min(Math.max(edge, depth / 2), depth);
    }
    return edge * 0.5; // floats: roughly half out; exact fraction needs the trajectory
}

// --- input handling -----------------------------------------------------------

function canvasPoint(event: MouseEvent): { x: number; y: number } {
    const bounds = canvas.getBoundingClientRect();
    return { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
}

function cubeAt(x: number, y: number): CubeView | null {
    const view = stageView();
    if (!view || !view.cubes) {
        return null;
    }
    for (let index = 0; index < view.cubes.length; index++) {
        const position = shelfPosition(index);
        if (x >= position.x && x <= position.x + CUBE_SPRITE && y >= position.y && y <= position.y + CUBE_SPRITE) {
            return view.cubes[index];
        }
    }
    return null;
}

let pressPoint: { x: number; y: number } | null = null;

canvas.addEventListener("mousedown", (event) => {
    if (app.scene.halted || isTestStage()) {
        return;
    }
    const point = canvasPoint(event);
    const cube = cubeAt(point.x, point.y);
    if (cube) {
        pressPoint = point;
        app.drag = { cube, x: point.x, y: point.y };
    }
});

canvas.addEventListener("mousemove", (event) => {
    if (app.drag) {
        const point = canvasPoint(event);
        app.drag.x = point.x;
        app.drag.y = point.y;
    }
});

canvas.addEventListener("mouseup", async (event) => {
    if (!app.drag) {
        return;
    }
    const point = canvasPoint(event);
    const cube = app.drag.cube;
    app.drag = null;
    const moved = pressPoint && Math.hypot(point.x - pressPoint.x, point.y - pressPoint.y) > 6;
    pressPoint = null;
    if (!moved) {
        handleCubeClick(cube);
        return;
    }
    const layout = tankLayouts().find(
        (candidate) =>
            point.x >= candidate.rect.x &&
            point.x <= candidate.rect.x + candidate.rect.w &&
            point.y >= candidate.rect.y - 30 &&
            point.y <= candidate.rect.y + candidate.rect.h,
    );
    if (!layout) {
        return;
    }
    const decision = dropAttempt(app.scene, cube.id, layout.tank.id);
    if (decision.action === "blocked") {
        notice(decision.reason);
        return;
    }
    if (decision.action === "prompt") {
        app.pendingDrop = { cubeId: cube.id, tankId: layout.tank.id };
        openPredictionDialog(cube, layout.tank.name);
        return;
    }
    await submitDrop(cube.id, layout.tank.id, null); // bonus: no prediction
});

async function handleCubeClick(cube: CubeView): Promise<void> {
    const view = stageView();
    if (!view?.balance) {
        return;
    }
    if (app.balanceSelection.includes(cube.id)) {
        app.balanceSelection = [];
        return;
    }
    app.balanceSelection.push(cube.id);
    if (app.balanceSelection.length === 2) {
        const [left, right] = app.balanceSelection;
        app.balanceSelection = [];
        const response = await app.client.weigh(left, right);
        if (!response.ok) {
            notice(response.error ?? "weigh rejected");
            return;
        }
        await refresh();
    }
}

function openPredictionDialog(cube: CubeView, tankName: string): void {
    predictionDialog.classList.remove("hidden");
    predictionDialog.querySelector("h3")!.textContent =
        `Cube ${cube.id} into the ${tankName} tank: what will it do?`;
}

predictionDialog.querySelectorAll("button[data-prediction]").forEach((button) =>
    button.addEventListener("click", async () => {
        const prediction = (button as HTMLElement).dataset.prediction!;
        predictionDialog.classList.add("hidden");
        if (!app.pendingDrop) {
            return;
        }
        const { cubeId, tankId } = app.pendingDrop;
        app.pendingDrop = null;
        await submitDrop(cubeId, tankId, prediction);
    }),
);

document.getElementById("prediction-cancel")!.addEventListener("click", () => {
    predictionDialog.classList.add("hidden");
    app.pendingDrop = null;
});

async function submitDrop(cubeId: string, tankId: string, prediction: string | null): Promise<void> {
    const view = stageView();
    const cube = view?.cubes?.find((candidate) => candidate.id === cubeId);
    if (!cube) {
        return;
    }
    let response;
    try {
        response = await app.client.submitPrediction(cubeId, tankId, prediction);
    } catch (error) {
        fatal(error instanceof ProtocolError ? error.message : String(error));
        return;
    }
    if (!response.ok) {
        notice(response.error ?? "drop rejected");
        return;
    }
    await refresh(); // the log now holds the prediction + outcome events
    if (!response.trajectory) {
        fatal("protocol violation: prediction result carried no trajectory");
        return;
    }
    lastTrajectory.set(`${app.scene.stage}|${cubeId}`, response.trajectory);
    try {
        const animation = startDropAnimation(app.scene, cubeId, tankId, response.trajectory, performance.now());
        app.drop = { animation, cube, tankId };
    } catch (error) {
        fatal(error instanceof Error ? error.message : String(error));
        return;
    }
    if (response.score_delta && response.score_delta > 0) {
        notice(`Correct! +${response.score_delta} points`);
    } else if (response.score_delta && response.score_delta < 0) {
        notice(`Not quite: ${response.score_delta} point`);
    }
}

advanceButton.addEventListener("click", async () => {
    const response = await app.client.advanceStage();
    if (!response.ok) {
        notice(response.error ?? "cannot advance yet");
        return;
    }
    app.drop = null;
    app.balanceSelection = [];
    await refresh();
});

// --- boot ----------------------------------------------------------------------

async function boot(): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const seed = Number(params.get("seed") ?? Math.floor(Math.random() * 1_000_000_000));
    const participant = params.get("participant") ?? `web-${seed}`;
    const created = await app.client.newSession(participant, seed);
    if (!created.ok) {
        fatal(created.error ?? "could not create a session");
        return;
    }
    await refresh();
    requestAnimationFrame(draw);
}

boot().catch((error) => fatal(error instanceof Error ? error.message : String(error)));
