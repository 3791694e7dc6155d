/**
 * Types and HTTP client for the newline-delimited command/event protocol.
 *
 * The engine is the single authority: every user action becomes one command
 * line, every reply is one event line. The client never fabricates results.
 */

export interface CubeView {
    id: string;
    volume_cm3: number;
    mass_g: number;
    dot_level: number;
}

export interface TankView {
    id: string;
    name: string;
    density_g_cm3: number;
}

export interface ItemView {
    item_id: string;
    prompt: string;
    options: string[];
}

export interface StageView {
    stage: string;
    instructions: string;
    scored: boolean;
    cubes?: CubeView[];
    tanks?: TankView[];
    balance?: boolean;
    items?: ItemView[];
}

export interface StateView {
    session_id: string;
    participant_id: string;
    rng_seed: number;
    stage: string;
    score: number;
    finalized: boolean;
    stages: Record<string, StageView>;
    tank_depth_cm: number;
    log: string[];
}

export interface TrajectoryPoint {
    t: number;
    submersion: number;
    velocity: number;
}

export interface ProtocolResponse {
    ok: boolean;
    event?: string;
    error?: string;
    stage?: string;
    score?: number;
    session_id?: string;
    finalized?: boolean;
    observed?: string;
    score_delta?: number;
    surface_breach?: boolean;
    trajectory?: TrajectoryPoint[];
    reading?: string;
    answered?: number;
    total?: number;
}

export class ProtocolError extends Error {}

export class Client {
    sessionId: string | null = null;

    constructor(private base: string = "") {}

    private async post(path: string, line: string): Promise<ProtocolResponse> {
        const response = await fetch(this.base + path, { method: "POST", body: line });
        const text = await response.text();
        let parsed: ProtocolResponse;
        try {
            parsed = JSON.parse(text.trim());
        } catch {
            throw new ProtocolError(`unparseable response: ${text.slice(0, 200)}`);
        }
        return parsed;
    }

    async newSession(participantId: string, seed: number): Promise<ProtocolResponse> {
        const line = JSON.stringify({ cmd: "new_session", participant_id: participantId, seed });
        const response = await this.post("/api/sessions", line);
        if (response.ok && response.session_id) {
            this.sessionId = response.session_id;
        }
        return response;
    }

    async command(message: Record<string, unknown>): Promise<ProtocolResponse> {
        if (!this.sessionId) {
            throw new ProtocolError("no session");
        }
        return this.post(`/api/sessions/${this.sessionId}/commands`, JSON.stringify(message));
    }

    advanceStage(): Promise<ProtocolResponse> {
        return this.command({ cmd: "advance_stage" });
    }

    submitPrediction(cubeId: string, tankId: string, prediction: string | null): Promise<ProtocolResponse> {
        return this.command({ cmd: "submit_prediction", cube_id: cubeId, tank_id: tankId, prediction });
    }

    weigh(left: string, right: string): Promise<ProtocolResponse> {
        return this.command({ cmd: "weigh", left, right });
    }

    answerItem(itemId: string, choice: number, confidence: number): Promise<ProtocolResponse> {
        return this.command({ cmd: "answer_item", item_id: itemId, choice, confidence });
    }

    async state(): Promise<StateView> {
        if (!this.sessionId) {
            throw new ProtocolError("no session");
        }
        const response = await fetch(`${this.base}/api/sessions/${this.sessionId}/state`);
        if (!response.ok) {
            throw new ProtocolError(`state fetch failed: ${response.status}`);
        }
        return (await response.json()) as StateView;
    }

    logUrl(): string {
        return `${this.base}/api/sessions/${this.sessionId}/log`;
    }
}
