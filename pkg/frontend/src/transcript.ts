// Pure projection of gateway audit events into transcript view items.
// Item order is event order; nothing is reordered client-side.

import type { GatewayEvent, RetrievedChunk } from './types.js';

export interface UserItem {
  kind: 'user';
  eventId: number;
  text: string;
}

export interface ToolStepItem {
  kind: 'tool_step';
  eventId: number;
  callId: string;
  name: string;
  args: unknown;
  result: string | null; // null while the result event has not arrived yet
  isError: boolean;
}

export interface AssistantItem {
  kind: 'assistant';
  eventId: number;
  text: string;
}

export interface ErrorItem {
  kind: 'error';
  eventId: number;
  message: string;
}

export type TranscriptItem = UserItem | ToolStepItem | AssistantItem | ErrorItem;

export function buildTranscript(events: GatewayEvent[]): TranscriptItem[] {
  const items: TranscriptItem[] = [];
  const stepsByCallId = new Map<string, ToolStepItem>();
  for (const event of events) {
    switch (event.kind) {
      case 'user_prompt': {
        items.push({ kind: 'user', eventId: event.event_id, text: String(event.payload.text ?? '') });
        break;
      }
      case 'tool_call': {
        const step: ToolStepItem = {
          kind: 'tool_step',
          eventId: event.event_id,
          callId: String(event.payload.call_id ?? ''),
          name: String(event.payload.tool_name ?? ''),
          args: event.payload.arguments,
          result: null,
          isError: false,
        };
        stepsByCallId.set(step.callId, step);
        items.push(step);
        break;
      }
      case 'tool_result': {
        const step = stepsByCallId.get(String(event.payload.call_id ?? ''));
        if (step) {
          step.result = String(event.payload.result ?? '');
          step.isError = Boolean(event.payload.is_error);
        }
        break;
      }
      case 'model_response': {
        items.push({
          kind: 'assistant',
          eventId: event.event_id,
          text: String(event.payload.content ?? ''),
        });
        break;
      }
      case 'error': {
        items.push({
          kind: 'error',
          eventId: event.event_id,
          message: String(event.payload.message ?? ''),
        });
        break;
      }
      default:
        // retrieval and model_request feed other panels
        break;
    }
  }
  return items;
}

export function latestRetrieval(events: GatewayEvent[]): RetrievedChunk[] {
  for (let i = events.length - 1; i >= 0; i--) {
    const event = events[i];
    if (event && event.kind === 'retrieval') {
      return (event.payload.chunks ?? []) as RetrievedChunk[];
    }
  }
  return [];
}

export function lastEventId(events: GatewayEvent[]): number {
  const last = events[events.length - 1];
  return last ? last.event_id : 0;
}

export function turnComplete(events: GatewayEvent[], baselineEventId: number): boolean {
  return events.some(
    (e) => e.event_id > baselineEventId && e.kind === 'model_response',
  );
}
