// Service response shapes. The UI mirrors these verbatim; it never derives
// probabilities or distances on its own.

export interface QuestionPayload {
  id: string;
  index: number;
  text: string;
  n_options: number;
}

export interface CandidateEntry {
  candidate_id: string;
  distance: number;
}

export interface BeliefExport {
  resolution: number;
  bounds: [number, number];
  mass: number[];
  map_estimate: [number, number];
}

export interface Progress {
  answered: number;
  skipped: number;
  total: number;
}

export interface SessionPayload {
  session_id: string;
  selector: string;
  m: number;
  done: boolean;
  question: QuestionPayload | null;
  progress: Progress;
  belief: BeliefExport;
  belief_summary: {
    map_estimate: [number, number];
    spatial_variance: number;
  };
  recommendations: {
    type1: CandidateEntry[] | null;
    type2: CandidateEntry[];
  };
  predictions: Record<string, number>;
}

export interface SelectorsPayload {
  selectors: string[];
  default: string;
}

export type AnswerValue = 0 | 1 | "skip";

export interface ApiErrorBody {
  code: string;
  message: string;
}
