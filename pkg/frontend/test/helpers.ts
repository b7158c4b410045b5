import type {
  AuditDocument,
  AuditResultDocument,
  HeatmapDocument,
  SessionDocument,
} from "../src/types.js";

export function resultDoc(jr: number, c = 2, n = 4, k = 2): AuditResultDocument {
  return {
    jr_value: jr,
    max_coalition_size: c,
    satisfies_jr: jr < 1,
    n,
    k,
    algorithm: "fast",
    witnesses: c
      ? [{ question_id: "q009", threshold: 0.2, coalition: ["p001", "p002"].slice(0, c) }]
      : [],
  };
}

export function auditDoc(jr: number, provenance = "custom"): AuditDocument {
  return {
    schema: "slateaudit/report-v1",
    mode: "audit",
    slate: {
      provenance,
      members: [
        { question_id: "q001", text: "first question?" },
        { question_id: "q002", text: "second question?" },
      ],
    },
    result: resultDoc(jr),
  };
}

export function sessionDoc(m = 6, k = 2): SessionDocument {
  return {
    schema: "slateaudit/session-v1",
    k,
    questions: Array.from({ length: m }, (_, i) => ({
      id: `q${String(i + 1).padStart(3, "0")}`,
      author_id: `p${String(i + 1).padStart(3, "0")}`,
      text: `proposed question number ${i + 1}?`,
    })),
    human_slate: [`q001`, `q002`].slice(0, k),
  };
}

export function heatmapDoc(k = 2, m = 6): HeatmapDocument {
  return {
    schema: "slateaudit/heatmap-v1",
    rows: Array.from({ length: k }, (_, r) => `q${String(r + 1).padStart(3, "0")}`),
    row_texts: Array.from({ length: k }, (_, r) => `slate question ${r + 1}?`),
    columns: Array.from({ length: m }, (_, c) => `p${String(c + 1).padStart(3, "0")}`),
    cells: Array.from({ length: k }, (_, r) =>
      Array.from({ length: m }, (_, c) => (r === 0 && c === 0 ? 1 : (c % 10) / 10)),
    ),
  };
}

/** Minimal fetch stub: route table from "METHOD path" to a response body. */
export function stubFetch(
  routes: Record<string, (body?: unknown) => unknown>,
): (input: string, init?: RequestInit) => Promise<Response> {
  return async (input, init) => {
    const method = init?.method ?? "GET";
    const path = input.split("?")[0];
    const handler = routes[`${method} ${path}`];
    if (!handler) {
      return new Response(JSON.stringify({ error: `no route ${method} ${path}` }), {
        status: 404,
      });
    }
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    try {
      const payload = handler(body);
      return new Response(JSON.stringify(payload), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    } catch (err) {
      const status = err instanceof HttpStub ? err.status : 500;
      const message = err instanceof Error ? err.message : String(err);
      return new Response(JSON.stringify({ error: message }), { status });
    }
  };
}

export class HttpStub extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}
