import { describe, expect, it } from "vitest";

import type { ChatResponseBody } from "../src/api.js";
import {
  applyFailure,
  applyRatingFailure,
  applyRatingSuccess,
  applyResponse,
  beginRating,
  beginSend,
  canRate,
  canSend,
  initialState,
  orderingConsistent,
  showOpening,
} from "../src/state.js";

function botReply(turnIndex: number, text = "hello"): ChatResponseBody {
  return { response: text, session_id: "s", turn_index: turnIndex };
}

describe("transcript state", () => {
  it("appends the user turn immediately and blocks further input", () => {
    const state = beginSend(initialState(), "hi there");
    expect(state.pending).toBe(true);
    expect(state.turns).toEqual([{ speaker: "user", text: "hi there", turnIndex: 1 }]);
    expect(canSend(state, "more")).toBe(false);
  });

  it("rejects empty submissions client-side", () => {
    const state = initialState();
    expect(canSend(state, "   ")).toBe(false);
    expect(beginSend(state, "   ")).toBe(state);
  });

  it("appends the bot turn on response and unblocks", () => {
    let state = beginSend(initialState(), "hi");
    state = applyResponse(state, botReply(1, "welcome"));
    expect(state.pending).toBe(false);
    expect(state.turns.map((t) => t.speaker)).toEqual(["user", "bot"]);
    expect(state.turns[1].turnIndex).toBe(1);
    expect(canSend(state, "next")).toBe(true);
  });

  it("keeps the transcript on failure and records the error", () => {
    let state = beginSend(initialState(), "hi");
    state = applyFailure(state, "Could not reach the server.");
    expect(state.turns).toHaveLength(1);
    expect(state.error).toBe("Could not reach the server.");
    expect(state.pending).toBe(false);
  });

  it("numbers user turns to match the server", () => {
    let state = initialState();
    state = showOpening(state, "welcome!");
    state = beginSend(state, "one");
    state = applyResponse(state, botReply(1));
    state = beginSend(state, "two");
    state = applyResponse(state, botReply(2));
    expect(orderingConsistent(state)).toBe(true);
  });

  it("shows the opening only on an empty transcript", () => {
    let state = showOpening(initialState(), "hi!");
    expect(state.turns).toHaveLength(1);
    state = showOpening(state, "hi again!");
    expect(state.turns).toHaveLength(1);
  });

  it("stores the latest debug block", () => {
    let state = beginSend(initialState(), "hi");
    const body: ChatResponseBody = {
      ...botReply(1),
      debug: {
        state: "covid_q_zoo",
        variables: { student: true },
        stack: [],
        features: {
          sentiment: 0.2,
          entities: [],
          topic_dist: null,
          intent_dist: null,
          qa_answer: null,
          diagnostics: [],
        },
        chosen_transitions: { user: "u1", system: ["s1"] },
        components: ["covid"],
        unmatched: false,
        used_fallback: false,
        history: [],
      },
    };
    state = applyResponse(state, body);
    expect(state.lastDebug?.variables).toEqual({ student: true });
  });
});

describe("rating gate", () => {
  it("is disabled before any bot turn", () => {
    expect(canRate(initialState())).toBe(false);
    const opened = showOpening(initialState(), "welcome");
    expect(canRate(opened)).toBe(false); // the opening alone is not a turn
  });

  it("unlocks after a real bot turn and closes after success", () => {
    let state = beginSend(initialState(), "hi");
    state = applyResponse(state, botReply(1));
    expect(canRate(state)).toBe(true);
    state = beginRating(state);
    expect(canRate(state)).toBe(false);
    state = applyRatingSuccess(state);
    expect(state.rated).toBe(true);
    expect(canRate(state)).toBe(false);
  });

  it("stays active after a failed submission", () => {
    let state = beginSend(initialState(), "hi");
    state = applyResponse(state, botReply(1));
    state = beginRating(state);
    state = applyRatingFailure(state);
    expect(state.rated).toBe(false);
    expect(canRate(state)).toBe(true);
  });
});
