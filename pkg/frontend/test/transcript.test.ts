import { describe, expect, it } from 'vitest';

import { buildTranscript, latestRetrieval, turnComplete } from '../src/transcript.js';
import type { GatewayEvent } from '../src/types.js';

function event(id: number, kind: GatewayEvent['kind'], payload: Record<string, unknown>): GatewayEvent {
  return { event_id: id, session_id: 's', kind, payload, ts: 0 };
}

const MENU_TOGGLE_TURN: GatewayEvent[] = [
  event(1, 'user_prompt', { text: 'How can I implement background music in the game?' }),
  event(2, 'retrieval', {
    query: 'q',
    chunks: [
      { chunk_id: 'c1', source: 'docs/audio.md', score: 0.91, text: 'music path' },
      { chunk_id: 'c2', source: 'docs/architecture.md', score: 0.52, text: 'menu wiring' },
    ],
  }),
  event(3, 'model_request', { request: {} }),
  event(4, 'tool_call', { call_id: 'k1', tool_name: 'load_battleship_json', arguments: {} }),
  event(5, 'tool_result', { call_id: 'k1', tool_name: 'load_battleship_json', result: '{"loaded":true}', is_error: false }),
  event(6, 'model_request', { request: {} }),
  event(7, 'model_response', { content: 'use MusicPlayer', finish_reason: 'stop' }),
];

describe('buildTranscript', () => {
  it('projects events into items in event order', () => {
    const items = buildTranscript(MENU_TOGGLE_TURN);
    expect(items.map((i) => i.kind)).toEqual(['user', 'tool_step', 'assistant']);
    expect(items.map((i) => i.eventId)).toEqual([1, 4, 7]);
  });

  it('pairs tool results onto their calls by call id', () => {
    const items = buildTranscript(MENU_TOGGLE_TURN);
    const step = items[1];
    if (step?.kind !== 'tool_step') throw new Error('expected tool step');
    expect(step.name).toBe('load_battleship_json');
    expect(step.result).toBe('{"loaded":true}');
    expect(step.isError).toBe(false);
  });

  it('keeps a pending step when the result has not arrived', () => {
    const items = buildTranscript(MENU_TOGGLE_TURN.slice(0, 4));
    const step = items[1];
    if (step?.kind !== 'tool_step') throw new Error('expected tool step');
    expect(step.result).toBeNull();
  });

  it('marks error results and renders error events inline', () => {
    const events = [
      ...MENU_TOGGLE_TURN,
      event(8, 'tool_call', { call_id: 'k2', tool_name: 'load_battleship_json', arguments: {} }),
      event(9, 'tool_result', { call_id: 'k2', tool_name: 'load_battleship_json', result: '{"error":"inventory already loaded"}', is_error: true }),
      event(10, 'error', { message: 'tool loop budget exceeded' }),
    ];
    const items = buildTranscript(events);
    const second = items[3];
    if (second?.kind !== 'tool_step') throw new Error('expected tool step');
    expect(second.isError).toBe(true);
    const last = items[4];
    expect(last?.kind).toBe('error');
  });
});

describe('latestRetrieval / turnComplete', () => {
  it('returns the latest retrieval chunks in event order', () => {
    const chunks = latestRetrieval(MENU_TOGGLE_TURN);
    expect(chunks.map((c) => c.chunk_id)).toEqual(['c1', 'c2']);
  });

  it('is empty with no retrieval events', () => {
    expect(latestRetrieval([event(1, 'user_prompt', { text: 'x' })])).toEqual([]);
  });

  it('detects turn completion only past the baseline', () => {
    expect(turnComplete(MENU_TOGGLE_TURN, 0)).toBe(true);
    expect(turnComplete(MENU_TOGGLE_TURN, 7)).toBe(false);
    expect(turnComplete(MENU_TOGGLE_TURN.slice(0, 6), 0)).toBe(false);
  });
});
