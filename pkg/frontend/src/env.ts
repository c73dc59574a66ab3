// Gym-style environment over the simulation service.
//
// An action index maps to fact templates injected before stepping; the
// observation vector is the fixed-order concatenation of per-agent grid
// coordinates decoded from atLoc atoms.  Trace deltas ride along in the
// step info so reward shaping can see which rules fired.

import { ServiceClient } from "./client.js";
import { parseSubject, type Observation, type TraceDelta } from "./protocol.js";

export interface ActionSpec {
  name: string;
  /** Facts to inject, e.g. ["moveDir(red-agent-1,down):[1,1]"]; empty = noop. */
  facts: string[];
}

export interface EnvConfig {
  /** Builtin scenario name on the server (e.g. "minigrid", "evasion"). */
  builtin: string;
  /** Entities whose coordinates make up the observation vector, in order. */
  trackedEntities: string[];
  /** Grid side length for decoding cell ids into (x, y). */
  gridSide: number;
  actions: ActionSpec[];
  /** Extra engine-config overrides forwarded to the load command. */
  config?: Record<string, unknown>;
}

export interface StepResult {
  observation: number[];
  terminal: string | null;
  info: { trace: TraceDelta[]; t: number };
}

/** Moves plus noop for one controlled agent on a grid-war scenario. */
export function gridActions(agent: string): ActionSpec[] {
  const dirs = ["up", "down", "left", "right"];
  const moves = dirs.map((d) => ({
    name: `move_${d}`,
    facts: [`moveDir(${agent},${d}):[1,1]`],
  }));
  return [...moves, { name: "noop", facts: [] }];
}

export class GridEnv {
  readonly config: EnvConfig;
  private client: ServiceClient;
  private loaded = false;
  private terminal: string | null = null;
  /** Raw observations from the last response, for round-trip checks. */
  lastObservations: Observation[] = [];
  lastT = 0;

  constructor(client: ServiceClient, config: EnvConfig) {
    this.client = client;
    this.config = config;
  }

  get actionCount(): number {
    return this.config.actions.length;
  }

  private decode(observations: Observation[]): number[] {
    const vector: number[] = [];
    for (const entity of this.config.trackedEntities) {
      let cell = -1;
      for (const o of observations) {
        if (o.predicate !== "atLoc") continue;
        if (o.bounds[0] !== 1 || o.bounds[1] !== 1) continue;
        const [who, where] = parseSubject(o.subject);
        if (who === entity) {
          cell = Number(where);
          break;
        }
      }
      if (cell < 0) {
        vector.push(-1, -1);
      } else {
        vector.push(cell % this.config.gridSide, Math.floor(cell / this.config.gridSide));
      }
    }
    return vector;
  }

  async reset(): Promise<number[]> {
    const cmd = this.loaded
      ? ({ cmd: "reset" } as const)
      : ({ cmd: "load", builtin: this.config.builtin, config: this.config.config } as const);
    const response = await this.client.expectOk(cmd);
    this.loaded = true;
    this.terminal = null;
    this.lastObservations = response.observations ?? [];
    this.lastT = response.t ?? 0;
    return this.decode(this.lastObservations);
  }

  async step(actionIndex: number): Promise<StepResult> {
    if (!this.loaded) throw new Error("reset() before step()");
    if (this.terminal !== null) throw new Error("episode is terminal; reset() first");
    const action = this.config.actions[actionIndex];
    if (!action) throw new Error(`action index ${actionIndex} out of range`);
    if (action.facts.length > 0) {
      await this.client.expectOk({ cmd: "set_facts", facts: action.facts });
    }
    const response = await this.client.expectOk({ cmd: "step", n: 1 });
    this.lastObservations = response.observations ?? [];
    this.lastT = response.t ?? this.lastT + 1;
    this.terminal = response.terminal?.outcome ?? null;
    return {
      observation: this.decode(this.lastObservations),
      terminal: this.terminal,
      info: { trace: response.trace ?? [], t: this.lastT },
    };
  }

  /** Entailment check against the server's computed history. */
  async holds(atom: string, interval: [number, number], t: number): Promise<boolean> {
    const response = await this.client.expectOk({ cmd: "query", atom, interval, t });
    return response.entailed === true;
  }
}
