/** Wire types of the evaluation service consumed by this UI. */

export type Stage = "topic_comment" | "question" | "conjunct_screen" | "done";

export interface ConjunctButton {
  conjunct_id: string;
  surface: string;
  surface_forms: Record<string, string>;
}

export interface ProfileEntry {
  pair_index: number;
  conjunct_id: string;
  surface: string;
}

export interface ScreenView {
  session_id: string;
  stage_token: string;
  stage: Stage;
  mode: "lazy" | "full";
  language: string;
  can_backtrack: boolean;
  progress: { completed: number; total: number };
  pair_index?: number;
  sentence_prev?: string;
  sentence_curr?: string;
  prompt?: string;
  answers?: string[];
  conjuncts?: ConjunctButton[];
  profile_summary?: ProfileEntry[];
}

export interface CreateSessionRequest {
  document_id: string;
  dialog_tree_id: string;
  evaluator_id: string;
  mode: "lazy" | "full";
}

export interface TopicCommentPayload {
  topics: string[];
  comments: string[];
  intra_pair_conjuncts?: string[];
}

export type UiAction =
  | { kind: "answer"; answerIndex: number }
  | { kind: "conjunct"; conjunctId: string }
  | { kind: "topic_comment"; payload: TopicCommentPayload }
  | { kind: "backtrack" };
