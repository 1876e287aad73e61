import type { FetchLike } from '../src/api';

export interface RecordedCall {
  url: string;
  method: string;
  body: string | null;
}

/** Fixture-backed fetch: routes by path substring, records every call. */
export function fakeFetch(
  routes: Record<string, unknown>,
  options: { status?: number } = {},
): { fetchImpl: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? 'GET',
      body: typeof init?.body === 'string' ? init.body : null,
    });
    const hit = Object.entries(routes).find(([path]) => url.includes(path));
    if (!hit) {
      return new Response(
        JSON.stringify({ status: 404, code: 'NOT_FOUND', detail: 'no route' }),
        { status: 404 },
      );
    }
    const payload = hit[1];
    const status = options.status ?? 200;
    const body = payload instanceof Blob ? payload : JSON.stringify(payload);
    return new Response(body, { status });
  };
  return { fetchImpl, calls };
}
