/** Session identity: a random 128-bit token held in page storage. */

const STORAGE_KEY = "emorette.session";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export function newSessionId(randomBytes?: Uint8Array): string {
  let bytes = randomBytes;
  if (!bytes) {
    const fresh = new Uint8Array(new ArrayBuffer(16));
    crypto.getRandomValues(fresh);
    bytes = fresh;
  }
  if (bytes.length !== 16) {
    throw new Error("session id needs 16 random bytes");
  }
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

/** Reloading the page keeps the same session; the server holds the state. */
export function getOrCreateSessionId(storage: StorageLike): string {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing && /^[0-9a-f]{32}$/.test(existing)) {
    return existing;
  }
  const fresh = newSessionId();
  storage.setItem(STORAGE_KEY, fresh);
  return fresh;
}

export function resetSession(storage: StorageLike): string {
  storage.removeItem(STORAGE_KEY);
  return getOrCreateSessionId(storage);
}
