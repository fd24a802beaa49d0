/**
 * Chat page wiring: transcript, composer, star rating, and the author-mode
 * inspector. All dialogue state lives on the server; this page only renders
 * what it is told.
 */

import { ApiError, EmoretteClient } from "./api.js";
import { featureRows, stackRows, variableRows, Row } from "./inspector.js";
import { getOrCreateSessionId } from "./session.js";
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
  TranscriptState,
} from "./state.js";

declare global {
  interface Window {
    EMORETTE_SERVER?: string;
  }
}

const serverUrl = window.EMORETTE_SERVER ?? "";
const authorMode = new URLSearchParams(window.location.search).get("author") === "1";
const client = new EmoretteClient(serverUrl);
const sessionId = getOrCreateSessionId(window.localStorage);

let state: TranscriptState = initialState();
let lastFailedUtterance: string | null = null;

const transcriptEl = byId("transcript");
const formEl = byId("composer") as HTMLFormElement;
const inputEl = byId("utterance") as HTMLInputElement;
const sendEl = byId("send") as HTMLButtonElement;
const ratingEl = byId("rating");
const ratingNoteEl = byId("rating-note");
const inspectorEl = byId("inspector");
const inspectorBodyEl = byId("inspector-body");
const healthEl = byId("health");

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el;
}

function setState(next: TranscriptState): void {
  state = next;
  render();
}

function render(): void {
  renderTranscript();
  renderComposer();
  renderRating();
  renderInspector();
}

function renderTranscript(): void {
  transcriptEl.replaceChildren();
  for (const turn of state.turns) {
    const bubble = document.createElement("div");
    bubble.className = `bubble ${turn.speaker}`;
    bubble.textContent = turn.text;
    transcriptEl.appendChild(bubble);
  }
  if (state.pending) {
    const typing = document.createElement("div");
    typing.className = "bubble bot typing";
    typing.textContent = "...";
    transcriptEl.appendChild(typing);
  }
  if (state.error) {
    const error = document.createElement("div");
    error.className = "bubble error";
    error.textContent = state.error;
    if (lastFailedUtterance) {
      const retry = document.createElement("button");
      retry.type = "button";
      retry.textContent = "retry";
      retry.addEventListener("click", () => {
        const text = lastFailedUtterance;
        lastFailedUtterance = null;
        // The user turn is already in the transcript; resend without re-adding.
        void resend(text ?? "");
      });
      error.append(" ");
      error.appendChild(retry);
    }
    transcriptEl.appendChild(error);
  }
  transcriptEl.scrollTop = transcriptEl.scrollHeight;
}

function renderComposer(): void {
  const blocked = state.pending;
  inputEl.disabled = blocked;
  sendEl.disabled = blocked || inputEl.value.trim().length === 0;
}

function renderRating(): void {
  const enabled = canRate(state);
  ratingEl.querySelectorAll("button").forEach((star) => {
    (star as HTMLButtonElement).disabled = !enabled;
  });
  if (state.rated) {
    ratingNoteEl.textContent = "Thanks for the feedback!";
    inputEl.disabled = true;
    sendEl.disabled = true;
  } else if (state.ratingPending) {
    ratingNoteEl.textContent = "Sending...";
  } else if (!enabled) {
    ratingNoteEl.textContent = "Chat a little before rating.";
  } else {
    ratingNoteEl.textContent = "Rate this conversation:";
  }
}

function renderInspector(): void {
  if (!authorMode && inspectorEl.dataset.open !== "1") {
    inspectorEl.classList.add("collapsed");
  } else {
    inspectorEl.classList.remove("collapsed");
  }
  inspectorBodyEl.replaceChildren();
  if (!state.lastDebug) {
    inspectorBodyEl.textContent = "No debug data yet.";
    return;
  }
  const debug = state.lastDebug;
  inspectorBodyEl.append(
    section("Variable table", variableRows(debug)),
    section("Stack", stackRows(debug)),
    section("Features", featureRows(debug)),
  );
}

function section(title: string, rows: Row[]): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "inspector-section";
  const heading = document.createElement("h3");
  heading.textContent = title;
  wrap.appendChild(heading);
  const table = document.createElement("table");
  if (rows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "(empty)";
    wrap.appendChild(empty);
    return wrap;
  }
  for (const row of rows) {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = row.label;
    const td = document.createElement("td");
    td.textContent = row.value;
    tr.append(th, td);
    table.appendChild(tr);
  }
  wrap.appendChild(table);
  return wrap;
}

async function send(text: string): Promise<void> {
  if (!canSend(state, text)) {
    return;
  }
  setState(beginSend(state, text));
  inputEl.value = "";
  await resend(text);
}

async function resend(text: string): Promise<void> {
  if (!text) {
    return;
  }
  if (!state.pending) {
    setState({ ...state, pending: true, error: null });
  }
  try {
    const body = await client.chat(sessionId, text, true);
    lastFailedUtterance = null;
    setState(applyResponse(state, body));
  } catch (err) {
    lastFailedUtterance = text;
    const message =
      err instanceof ApiError ? err.detail : "Could not reach the server.";
    setState(applyFailure(state, message));
  }
  inputEl.focus();
}

async function rate(stars: number): Promise<void> {
  if (!canRate(state)) {
    return;
  }
  setState(beginRating(state));
  try {
    await client.rate(sessionId, stars);
    setState(applyRatingSuccess(state));
  } catch {
    setState(applyRatingFailure(state));
  }
}

formEl.addEventListener("submit", (event) => {
  event.preventDefault();
  void send(inputEl.value);
});
inputEl.addEventListener("input", renderComposer);

for (let stars = 1; stars <= 5; stars += 1) {
  const star = document.createElement("button");
  star.type = "button";
  star.textContent = "★".repeat(stars);
  star.title = `${stars} star${stars > 1 ? "s" : ""}`;
  star.addEventListener("click", () => void rate(stars));
  ratingEl.appendChild(star);
}

byId("inspector-toggle").addEventListener("click", () => {
  inspectorEl.dataset.open = inspectorEl.dataset.open === "1" ? "0" : "1";
  renderInspector();
});

void client
  .health()
  .then((health) => {
    healthEl.textContent = `${health.graph_name} · ${health.state_count} states`;
  })
  .catch(() => {
    healthEl.textContent = "server unreachable";
  });

render();
inputEl.focus();
