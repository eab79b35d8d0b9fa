// Client-side sampling validation; mirrors the gateway's invariants so bad
// values are caught inline before a session is created. Sampling is fixed
// once the session exists.

import type { SamplingConfig } from './types.js';

export interface SamplingDraft {
  temperature: string;
  top_p: string;
  min_p: string;
}

export type FieldErrors = Partial<Record<keyof SamplingDraft, string>>;

export interface ValidationResult {
  ok: boolean;
  value?: SamplingConfig;
  errors: FieldErrors;
}

export const DEFAULT_SAMPLING: SamplingConfig = { temperature: 1.0, top_p: 1.0, min_p: 0.0 };

export function validateSampling(draft: SamplingDraft): ValidationResult {
  const errors: FieldErrors = {};

  const temperature = Number(draft.temperature);
  if (draft.temperature.trim() === '' || Number.isNaN(temperature)) {
    errors.temperature = 'temperature must be a number';
  } else if (temperature < 0) {
    errors.temperature = 'temperature must be ≥ 0';
  }

  const topP = Number(draft.top_p);
  if (draft.top_p.trim() === '' || Number.isNaN(topP)) {
    errors.top_p = 'top_p must be a number';
  } else if (!(topP > 0 && topP <= 1)) {
    errors.top_p = 'top_p must be in (0, 1]';
  }

  const minP = Number(draft.min_p);
  if (draft.min_p.trim() === '' || Number.isNaN(minP)) {
    errors.min_p = 'min_p must be a number';
  } else if (!(minP >= 0 && minP < 1)) {
    errors.min_p = 'min_p must be in [0, 1)';
  }

  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, value: { temperature, top_p: topP, min_p: minP }, errors: {} };
}

export function draftFromConfig(config: SamplingConfig): SamplingDraft {
  return {
    temperature: String(config.temperature),
    top_p: String(config.top_p),
    min_p: String(config.min_p),
  };
}
