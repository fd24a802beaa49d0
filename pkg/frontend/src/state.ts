/**
 * Pure transcript/rating state. The UI layer applies these transitions and
 * renders the result; nothing here touches the DOM or the network, so the
 * conversation logic stays fully testable and the server stays authoritative.
 */

import type { ChatResponseBody, DebugBlock } from "./api.js";

export interface Turn {
  speaker: "user" | "bot";
  text: string;
  turnIndex: number;
}

export interface TranscriptState {
  turns: Turn[];
  pending: boolean;
  error: string | null; // inline error bubble; transcript stays intact
  lastDebug: DebugBlock | null;
  rated: boolean;
  ratingPending: boolean;
}

export function initialState(): TranscriptState {
  return {
    turns: [],
    pending: false,
    error: null,
    lastDebug: null,
    rated: false,
    ratingPending: false,
  };
}

/** A send is allowed only when idle and nonempty; one request in flight max. */
export function canSend(state: TranscriptState, text: string): boolean {
  return !state.pending && text.trim().length > 0;
}

export function beginSend(state: TranscriptState, text: string): TranscriptState {
  if (!canSend(state, text)) {
    return state;
  }
  const nextIndex = state.turns.filter((t) => t.speaker === "user").length + 1;
  return {
    ...state,
    pending: true,
    error: null,
    turns: [...state.turns, { speaker: "user", text: text.trim(), turnIndex: nextIndex }],
  };
}

export function applyResponse(state: TranscriptState, body: ChatResponseBody): TranscriptState {
  return {
    ...state,
    pending: false,
    error: null,
    lastDebug: body.debug ?? state.lastDebug,
    turns: [...state.turns, { speaker: "bot", text: body.response, turnIndex: body.turn_index }],
  };
}

export function applyFailure(state: TranscriptState, message: string): TranscriptState {
  return { ...state, pending: false, error: message };
}

export function showOpening(state: TranscriptState, text: string): TranscriptState {
  if (state.turns.length > 0) {
    return state;
  }
  return { ...state, turns: [{ speaker: "bot", text, turnIndex: 0 }] };
}

/** Rating unlocks after the first bot reply and closes after one success. */
export function canRate(state: TranscriptState): boolean {
  return (
    !state.rated &&
    !state.ratingPending &&
    state.turns.some((t) => t.speaker === "bot" && t.turnIndex > 0)
  );
}

export function beginRating(state: TranscriptState): TranscriptState {
  return { ...state, ratingPending: true };
}

export function applyRatingSuccess(state: TranscriptState): TranscriptState {
  return { ...state, ratingPending: false, rated: true };
}

export function applyRatingFailure(state: TranscriptState): TranscriptState {
  // Leave the widget active so the user can retry.
  return { ...state, ratingPending: false };
}

/** Server turn ordering must hold: bot turn_index matches its user turn. */
export function orderingConsistent(state: TranscriptState): boolean {
  let expected = 0;
  for (const turn of state.turns) {
    if (turn.speaker === "user") {
      expected += 1;
    } else if (turn.turnIndex !== 0 && turn.turnIndex !== expected) {
      return false;
    }
  }
  return true;
}
