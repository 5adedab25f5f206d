import type {
  AnswerValue,
  ExplanationNodePayload,
  SolutionPayload,
  StatusPayload,
  TraceEventPayload,
} from './types.js';

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const r = await fetch(base + path, init);
  if (!r.ok) {
    let detail = '';
    try {
      detail = ((await r.json()) as { error?: string }).error ?? '';
    } catch {
      // non-JSON error body; the status code will have to do
    }
    throw new ApiError(r.status, detail || `HTTP ${r.status}`);
  }
  return r.json() as Promise<T>;
}

function post(body: unknown): RequestInit {
  return {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  };
}

export async function startSession(base: string, kb: string, goals?: string[]): Promise<string> {
  const r = await request<{ session_id: string }>(
    base, `/kbs/${encodeURIComponent(kb)}/sessions`, post(goals ? { goals } : {}));
  return r.session_id;
}

export function nextQuestion(base: string, sessionId: string): Promise<StatusPayload> {
  return request(base, `/sessions/${sessionId}/next`);
}

export function postAnswer(
  base: string, sessionId: string, questionId: number, value: AnswerValue | 'UNKNOWN',
): Promise<StatusPayload> {
  return request(base, `/sessions/${sessionId}/answers`,
    post({ question_id: questionId, value }));
}

export function getWhy(base: string, sessionId: string): Promise<ExplanationNodePayload[]> {
  return request(base, `/sessions/${sessionId}/why`);
}

export function getRule(
  base: string, sessionId: string, name: string,
): Promise<ExplanationNodePayload> {
  return request(base, `/sessions/${sessionId}/rules/${encodeURIComponent(name)}`);
}

export function postRevision(
  base: string, sessionId: string, questionId: number, value: AnswerValue | 'UNKNOWN',
): Promise<StatusPayload> {
  return request(base, `/sessions/${sessionId}/revisions`,
    post({ question_id: questionId, value }));
}

export function getSolutions(base: string, sessionId: string): Promise<SolutionPayload[]> {
  return request(base, `/sessions/${sessionId}/solutions`);
}

export function getTrace(base: string, sessionId: string): Promise<TraceEventPayload[]> {
  return request(base, `/sessions/${sessionId}/trace`);
}
