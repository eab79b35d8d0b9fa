// Wire shapes of the gateway; the UI never invents state beyond these.

export interface SamplingConfig {
  temperature: number;
  top_p: number;
  min_p: number;
}

export interface WireToolCall {
  id: string;
  type: string;
  function: { name: string; arguments: string };
}

export interface WireMessage {
  role: 'system' | 'user' | 'assistant' | 'tool';
  content: string | null;
  tool_calls?: WireToolCall[];
  tool_call_id?: string;
}

export interface SessionView {
  session_id: string;
  model_id: string;
  sampling: SamplingConfig;
  inventory_loaded: boolean;
  closed: boolean;
  messages: WireMessage[];
}

export interface RetrievedChunk {
  chunk_id: string;
  source: string;
  score: number;
  text: string;
}

export interface ToolTraceStep {
  call_id: string;
  tool_name: string;
  arguments: Record<string, unknown>;
  result: string;
  is_error: boolean;
}

export interface TurnResponse {
  text: string;
  sampling_echo: SamplingConfig | null;
  tool_trace: ToolTraceStep[];
  retrieved: RetrievedChunk[];
}

export interface GatewayEvent {
  event_id: number;
  session_id: string;
  kind:
    | 'user_prompt'
    | 'retrieval'
    | 'model_request'
    | 'model_response'
    | 'tool_call'
    | 'tool_result'
    | 'error';
  payload: Record<string, unknown>;
  ts: number;
}
