import type {
  AlertFiring,
  ChangeRecord,
  CommitRecord,
  ComplianceReport,
  HistorySeries,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ClientConfig {
  baseUrl: string;
  token?: string;
  fetchImpl?: FetchLike;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(detail);
  }
}

/**
 * Thin typed wrapper over the /api/v1 endpoints. All reads return the
 * payload verbatim; error envelopes become ApiError.
 */
export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(private config: ClientConfig) {
    this.fetchImpl = config.fetchImpl ?? fetch.bind(globalThis);
  }

  private headers(): Record<string, string> {
    return this.config.token ? { Authorization: `Bearer ${this.config.token}` } : {};
  }

  private url(path: string, params?: Record<string, string>): string {
    const base = this.config.baseUrl.replace(/\/$/, '');
    const query = params ? `?${new URLSearchParams(params)}` : '';
    return `${base}/api/v1${path}${query}`;
  }

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const response = await this.fetchImpl(this.url(path, params), {
      headers: this.headers(),
    });
    return this.unwrap<T>(response);
  }

  private async unwrap<T>(response: Response): Promise<T> {
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body.code ?? 'UNKNOWN', body.detail ?? '');
    }
    return body as T;
  }

  getCommits(workbook: string): Promise<CommitRecord[]> {
    return this.get(`/workbooks/${workbook}/commits`);
  }

  getDiff(workbook: string, from: string, to: string): Promise<ChangeRecord[]> {
    return this.get(`/workbooks/${workbook}/diff`, { from, to });
  }

  getHistory(
    workbook: string,
    sheet: string,
    a1: string,
    window = 4,
  ): Promise<HistorySeries> {
    return this.get(`/workbooks/${workbook}/cells/${sheet}/${a1}/history`, {
      window: String(window),
    });
  }

  getAlerts(workbook: string): Promise<AlertFiring[]> {
    return this.get(`/workbooks/${workbook}/alerts`);
  }

  getCompliance(
    workbook: string,
    manifest: string,
    from: string,
    to: string,
  ): Promise<ComplianceReport> {
    return this.get(`/workbooks/${workbook}/compliance`, { manifest, from, to });
  }

  /** Returns the restored workbook's canonical bytes. */
  async postRestore(workbook: string, commitId: string, actor = 'webui'): Promise<Blob> {
    const response = await this.fetchImpl(this.url(`/workbooks/${workbook}/restore`), {
      method: 'POST',
      headers: { ...this.headers(), 'Content-Type': 'application/json' },
      body: JSON.stringify({ commit_id: commitId, actor }),
    });
    if (!response.ok) {
      const body = await response.json();
      throw new ApiError(response.status, body.code ?? 'UNKNOWN', body.detail ?? '');
    }
    return response.blob();
  }
}
