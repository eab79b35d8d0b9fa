// Single configuration knob: where the gateway lives.
// Resolution order: ?gateway= query parameter, GATEWAY_URL (test processes),
// then the page's own origin.

export function gatewayUrl(): string {
  if (typeof window !== 'undefined' && window.location) {
    const fromQuery = new URLSearchParams(window.location.search).get('gateway');
    if (fromQuery) return fromQuery.replace(/\/$/, '');
  }
  const env = (globalThis as { process?: { env?: Record<string, string | undefined> } }).process?.env;
  if (env?.GATEWAY_URL) return env.GATEWAY_URL.replace(/\/$/, '');
  if (typeof window !== 'undefined' && window.location?.origin && window.location.origin !== 'null') {
    return window.location.origin;
  }
  return 'http://127.0.0.1:8080';
}
