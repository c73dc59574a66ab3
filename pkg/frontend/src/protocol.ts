// Wire types for the simulation service: newline-delimited JSON,
// one request, one response, strictly ordered.

export interface LoadRequest {
  cmd: "load";
  builtin?: string;
  rules?: string[];
  facts?: string[];
  graph?: unknown;
  config?: Record<string, unknown>;
}

export interface SetFactsRequest {
  cmd: "set_facts";
  facts: string[];
}

export interface StepRequest {
  cmd: "step";
  n: number;
}

export interface QueryRequest {
  cmd: "query";
  atom: string;
  interval: [number, number];
  t: number;
  negated?: boolean;
}

export type Request =
  | LoadRequest
  | SetFactsRequest
  | StepRequest
  | QueryRequest
  | { cmd: "reset" }
  | { cmd: "close" };

export interface TraceDelta {
  t: number;
  gamma: number;
  subject: string;
  predicate: string;
  old: [number, number];
  new: [number, number];
  rule: string;
}

export interface Observation {
  subject: string;
  predicate: string;
  bounds: [number, number];
  static: boolean;
}

export interface OkResponse {
  ok: true;
  t?: number;
  trace?: TraceDelta[];
  observations?: Observation[];
  terminal?: { outcome: string } | null;
  entailed?: boolean;
  staged?: number;
  actions?: string[];
  bye?: boolean;
}

export interface ErrorResponse {
  ok: false;
  error: string;
}

export type Response = OkResponse | ErrorResponse;

/** An edge subject prints as "(a,b)"; nodes are bare names. */
export function parseSubject(subject: string): string[] {
  if (subject.startsWith("(") && subject.endsWith(")")) {
    return subject.slice(1, -1).split(",");
  }
  return [subject];
}
