export interface ObservationPayload {
  digest: string;
  proprio: number[];
  board_planes: number[][][] | null;
  planner_planes: number[][][] | null;
  planner_action: number[] | null;
  topdown_image: number[][][] | null;
}

export interface StepResult {
  observation: ObservationPayload;
  reward_env: number;
  reward_abs: number;
  episode_done: boolean;
  aux_done: boolean;
  info: Record<string, unknown>;
}

export interface HealthInfo {
  status: string;
  version: string;
  build: string;
}

export interface MakeEnvResponse {
  env_id: string;
  game: string;
  action_dim: number;
  config: Record<string, unknown>;
}

export type ConfigOverrides = Record<string, unknown>;
