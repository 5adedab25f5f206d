/** Wire payload shapes, mirrored 1:1 from the consultation service. */

export type AnswerValue = string | number | string[];

export interface QuestionPayload {
  id: number;
  subject: string;
  prompt: string;
  options: string[] | null;
  value_kind: 'NUMERIC' | 'TEXT' | null;
  multi: boolean;
}

export interface StatusPayload {
  status: 'AwaitingAnswer' | 'Finished';
  question: QuestionPayload | null;
}

export interface SolutionPayload {
  choice: string;
  statement: string;
  confidence: number;
  mode: string;
}

export interface OriginPayload {
  kind: 'UserAnswer' | 'RuleConclusion' | 'Unresolved';
  question_id?: number;
  rule?: string;
}

export interface ConditionPayload {
  text: string;
  status: 'True' | 'False' | 'Unknown';
  origin: OriginPayload;
}

export interface ExplanationNodePayload {
  rule: string;
  outcome: string;
  conditions: ConditionPayload[];
}

export interface TraceEventPayload {
  kind: string;
  data: Record<string, unknown>;
}
