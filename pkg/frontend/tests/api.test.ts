import { describe, expect, it } from "vitest";

import { ApiError, EmoretteClient } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(status: number, body: unknown) {
  const calls: Call[] = [];
  const fn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("EmoretteClient", () => {
  it("posts the chat request shape with the debug flag", async () => {
    const { fn, calls } = fakeFetch(200, { response: "ok", session_id: "s", turn_index: 1 });
    const client = new EmoretteClient("http://bot", fn);
    const body = await client.chat("s", "hello", true);
    expect(body.response).toBe("ok");
    expect(calls[0].url).toBe("http://bot/v1/chat?debug=1");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      session_id: "s",
      utterance: "hello",
    });
  });

  it("omits the debug query when off", async () => {
    const { fn, calls } = fakeFetch(200, { response: "ok", session_id: "s", turn_index: 1 });
    await new EmoretteClient("", fn).chat("s", "hello", false);
    expect(calls[0].url).toBe("/v1/chat");
  });

  it("surfaces 4xx error text verbatim", async () => {
    const { fn } = fakeFetch(400, { error: "utterance must be nonempty" });
    const client = new EmoretteClient("", fn);
    await expect(client.chat("s", "", false)).rejects.toMatchObject({
      status: 400,
      detail: "utterance must be nonempty",
    });
  });

  it("propagates network failures for the retry path", async () => {
    const client = new EmoretteClient("", async () => {
      throw new TypeError("fetch failed");
    });
    await expect(client.chat("s", "hello", false)).rejects.toBeInstanceOf(TypeError);
  });

  it("posts ratings", async () => {
    const { fn, calls } = fakeFetch(200, { ok: true });
    await new EmoretteClient("", fn).rate("s", 5);
    expect(calls[0].url).toBe("/v1/rate");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ session_id: "s", rating: 5 });
  });

  it("rejects ratings the server refuses", async () => {
    const { fn } = fakeFetch(400, { error: "rating out of range: 6" });
    await expect(new EmoretteClient("", fn).rate("s", 6)).rejects.toBeInstanceOf(ApiError);
  });

  it("reads health", async () => {
    const { fn } = fakeFetch(200, { status: "ok", graph_name: "covid", state_count: 55 });
    const health = await new EmoretteClient("", fn).health();
    expect(health.state_count).toBe(55);
  });
});
