// Wire types mirroring docs/api.md. The UI renders these payloads and
// nothing else: no generation logic lives client-side.

export type Phase = 'refining' | 'executing' | 'done' | 'failed';

export interface SessionStatus {
  session_id: string;
  phase: Phase;
  created_at: number;
  prompt: string;
  followups: string[];
  rounds: number;
  error: string | null;
  has_map: boolean;
}

export interface TokenUsage {
  prompt_tokens: number;
  completion_tokens: number;
  agent_role: string;
}

export interface StepDoc {
  objective: string;
  tool_name: string;
  arguments: Record<string, unknown>;
  expected_result: string;
  output_binding?: string;
}

export interface TrajectoryDoc {
  trajectory_summary: string;
  tool_plan: StepDoc[];
  risks: string[];
  revision: number;
}

export interface IssueDoc {
  dimension: string;
  description: string;
  step_index?: number | null;
  correction_suggestion?: string | null;
}

export interface CritiqueDoc {
  decision: 'approve' | 'revise';
  blocking_issues: IssueDoc[];
  missing_information: string[];
}

export interface IterationDoc {
  revision: number;
  trajectory: TrajectoryDoc;
  trajectory_digest: string;
  actor_prompt: string;
  critique: CritiqueDoc | null;
  token_usage: TokenUsage;
  actor_usage: TokenUsage;
  critic_usage: TokenUsage | null;
  wall_time: number;
}

export interface TraceRound {
  session_id: string;
  iterations: IterationDoc[];
  outcome: 'approved' | 'best_effort' | 'aborted';
  final_trajectory: TrajectoryDoc | null;
  final_validation: IssueDoc[];
  error: string | null;
  token_totals: TokenUsage;
}

export interface TraceResponse {
  session_id: string;
  rounds: TraceRound[];
}

export interface GridDoc {
  width: number;
  height: number;
  rows: string[];
}

export interface LayerDoc {
  name: string;
  height_index: number;
  material: string;
  grid: GridDoc;
}

export interface PlacementDoc {
  kind: string;
  x: number;
  y: number;
  layer_name: string;
}

export interface MapDoc {
  format: string;
  layers: LayerDoc[];
  placements: PlacementDoc[];
  seed: number;
  provenance: string;
}

export interface ToolsResponse {
  registry_version: number;
  tools: string[];
  documentation: string;
  examples: string;
}
