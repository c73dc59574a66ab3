export { ServiceClient } from "./client.js";
export { GridEnv, gridActions } from "./env.js";
export type { ActionSpec, EnvConfig, StepResult } from "./env.js";
export type { Observation, TraceDelta, Request, Response } from "./protocol.js";
export { parseSubject } from "./protocol.js";
