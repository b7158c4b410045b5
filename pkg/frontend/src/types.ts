/** Shapes of the documents the audit service serves. */

export interface SessionQuestion {
  id: string;
  text: string;
  author_id?: string;
}

export interface SessionDocument {
  schema: string;
  k: number;
  n?: number;
  questions: SessionQuestion[];
  human_slate?: string[];
  sibling_groups?: string[][];
}

export interface WitnessDocument {
  question_id: string;
  threshold: number;
  coalition: string[];
}

export interface AuditResultDocument {
  jr_value: number;
  max_coalition_size: number;
  satisfies_jr: boolean;
  n: number;
  k: number;
  algorithm: string;
  witnesses: WitnessDocument[];
}

export interface SlateMemberDocument {
  question_id: string;
  text?: string;
}

export interface SlateDocument {
  provenance: string;
  members: SlateMemberDocument[];
}

export interface AuditDocument {
  schema: string;
  mode: string;
  slate?: SlateDocument;
  result?: AuditResultDocument;
  expansions?: { slate: SlateDocument; result: AuditResultDocument }[];
  mean_jr_value?: number;
  satisfies_jr?: boolean;
  ip?: { objective_size: number; objective_jr_value: number; optimal: boolean };
}

export interface HeatmapDocument {
  schema: string;
  rows: string[];
  row_texts: (string | null)[];
  columns: string[];
  cells: number[][];
}

export interface GenerateDocument extends AuditDocument {
  samples: { index: number; jr_value: number; attempts: number }[];
  failures: { index: number; attempts: number; reason: string }[];
  best?: {
    sample_index: number;
    slate: SlateDocument;
    result: AuditResultDocument;
    member_utilities: number[][];
  };
  ci95?: number;
}
