/** Client-side session bookkeeping.
 *
 * The state mirrors the server after every round-trip and performs no
 * inference of its own: confidences, orderings and explanations all
 * arrive verbatim in wire payloads.  The answered-question history is
 * rebuilt from the server trace, so what-if revisions that drop or
 * re-order answers can never leave the panel stale.
 */

import type {
  AnswerValue,
  ExplanationNodePayload,
  QuestionPayload,
  SolutionPayload,
  StatusPayload,
  TraceEventPayload,
} from './types.js';

export interface AnsweredEntry {
  questionId: number;
  subject: string;
  value: AnswerValue | 'UNKNOWN';
  replayed: boolean;
}

export interface UiSessionState {
  base: string;
  kb: string;
  sessionId: string;
  phase: 'Answering' | 'Finished';
  question: QuestionPayload | null;
  answered: AnsweredEntry[];
  /** Last question payload seen per subject; prompts for the history panel. */
  questionsBySubject: Record<string, QuestionPayload>;
  solutions: SolutionPayload[];
  why: ExplanationNodePayload[] | null;
}

export function initialState(base: string, kb: string, sessionId: string): UiSessionState {
  return {
    base,
    kb,
    sessionId,
    phase: 'Answering',
    question: null,
    answered: [],
    questionsBySubject: {},
    solutions: [],
    why: null,
  };
}

export function applyStatus(state: UiSessionState, status: StatusPayload): UiSessionState {
  const questionsBySubject = { ...state.questionsBySubject };
  if (status.question) {
    questionsBySubject[status.question.subject] = status.question;
  }
  return {
    ...state,
    phase: status.status === 'Finished' ? 'Finished' : 'Answering',
    question: status.question,
    questionsBySubject,
    why: null, // tied to the question it was fetched for
  };
}

export function applyTrace(state: UiSessionState, trace: TraceEventPayload[]): UiSessionState {
  const answered: AnsweredEntry[] = [];
  for (const event of trace) {
    if (event.kind !== 'Answered') continue;
    answered.push({
      questionId: event.data['question_id'] as number,
      subject: event.data['subject'] as string,
      value: event.data['value'] as AnswerValue | 'UNKNOWN',
      replayed: Boolean(event.data['replayed']),
    });
  }
  return { ...state, answered };
}

export function applySolutions(state: UiSessionState, solutions: SolutionPayload[]): UiSessionState {
  return { ...state, solutions };
}

export function applyWhy(state: UiSessionState, nodes: ExplanationNodePayload[]): UiSessionState {
  return { ...state, why: nodes };
}
