export { BindingError, BoundEnv, EmbodiedClient } from "./client.js";
export type {
  ConfigOverrides, HealthInfo, MakeEnvResponse, ObservationPayload, StepResult,
} from "./types.js";
