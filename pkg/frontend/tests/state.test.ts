import { describe, expect, it } from 'vitest';

import {
  applySolutions,
  applyStatus,
  applyTrace,
  applyWhy,
  initialState,
} from '../src/state.js';
import type { QuestionPayload, StatusPayload } from '../src/types.js';

const QUESTION: QuestionPayload = {
  id: 1,
  subject: 'risk',
  prompt: 'How risky?',
  options: ['low', 'high'],
  value_kind: null,
  multi: false,
};

const ASKING: StatusPayload = { status: 'AwaitingAnswer', question: QUESTION };
const DONE: StatusPayload = { status: 'Finished', question: null };

function base() {
  return initialState('http://127.0.0.1:9', 'demo', 'abc123');
}

describe('applyStatus', () => {
  it('enters Answering with the pending question on screen', () => {
    const state = applyStatus(base(), ASKING);
    expect(state.phase).toBe('Answering');
    expect(state.question).toEqual(QUESTION);
    expect(state.questionsBySubject['risk']).toEqual(QUESTION);
  });

  it('enters Finished and drops the question', () => {
    const state = applyStatus(applyStatus(base(), ASKING), DONE);
    expect(state.phase).toBe('Finished');
    expect(state.question).toBeNull();
    // prompts are kept for the history panel
    expect(state.questionsBySubject['risk']).toEqual(QUESTION);
  });

  it('returns to Answering when a revision triggers a new question', () => {
    const followUp: StatusPayload = {
      status: 'AwaitingAnswer',
      question: { ...QUESTION, id: 7, subject: 'duration' },
    };
    const state = applyStatus(applyStatus(base(), DONE), followUp);
    expect(state.phase).toBe('Answering');
    expect(state.question?.id).toBe(7);
  });

  it('invalidates the why panel on every transition', () => {
    const explained = applyWhy(applyStatus(base(), ASKING), [
      { rule: 'R1', outcome: 'Pending', conditions: [] }]);
    expect(explained.why).toHaveLength(1);
    expect(applyStatus(explained, DONE).why).toBeNull();
  });
});

describe('applyTrace', () => {
  it('rebuilds the answer history from Answered events only', () => {
    const state = applyTrace(base(), [
      { kind: 'Started', data: {} },
      { kind: 'QuestionAsked', data: { question_id: 1, subject: 'risk' } },
      { kind: 'Answered', data: { question_id: 1, subject: 'risk', value: ['low'], replayed: false } },
      { kind: 'RuleFired', data: { rule: 'R1', branch: 'THEN' } },
      { kind: 'Answered', data: { question_id: 2, subject: 'income', value: 5000, replayed: false } },
      { kind: 'Finished', data: {} },
    ]);
    expect(state.answered).toEqual([
      { questionId: 1, subject: 'risk', value: ['low'], replayed: false },
      { questionId: 2, subject: 'income', value: 5000, replayed: false },
    ]);
  });

  it('replaces stale history after a revision replay', () => {
    const before = applyTrace(base(), [
      { kind: 'Answered', data: { question_id: 1, subject: 'risk', value: ['low'], replayed: false } },
    ]);
    const after = applyTrace(before, [
      { kind: 'Revised', data: { question_id: 1, value: ['high'] } },
      { kind: 'Answered', data: { question_id: 2, subject: 'risk', value: ['high'], replayed: true } },
    ]);
    expect(after.answered).toEqual([
      { questionId: 2, subject: 'risk', value: ['high'], replayed: true },
    ]);
  });
});

describe('server-owned data', () => {
  it('stores solutions and why payloads verbatim', () => {
    const solutions = [
      { choice: 'b', statement: 'B', confidence: 3, mode: '0-10' },
      { choice: 'a', statement: 'A', confidence: 9, mode: '0-10' },
    ];
    // even an out-of-order list is kept as sent: ordering belongs to the server
    expect(applySolutions(base(), solutions).solutions).toEqual(solutions);

    const nodes = [{ rule: 'R4', outcome: 'ELSE', conditions: [] }];
    expect(applyWhy(base(), nodes).why).toEqual(nodes);
  });
});
