/** Typed client for the annotation service /v1 HTTP API. */

export interface NextImage {
  image: string | null;
  done: boolean;
  index: number;
  total: number;
  size: [number, number] | null;
  ready: boolean;
}

export interface PromptResult {
  confidence: number;
  mask_png_base64: string;
  points: number;
  instances: number;
}

export interface CommitResponse {
  record: Record<string, unknown>;
  next: string | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export class AnnotationApi {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    // 503 means the image embedding is still being computed; honor
    // Retry-After a bounded number of times before surfacing the error.
    for (let attempt = 0; ; attempt++) {
      const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
      if (res.status === 503 && attempt < 20) {
        const after = Number(res.headers.get("Retry-After") ?? "0.2");
        await sleep(Math.max(50, after * 1000));
        continue;
      }
      if (!res.ok) {
        let detail = res.statusText;
        try {
          const body = await res.json();
          detail = body.detail ?? detail;
        } catch {
          /* non-JSON error body */
        }
        throw new ApiError(res.status, detail);
      }
      return (await res.json()) as T;
    }
  }

  openSession(images: string[]): Promise<{ session: string }> {
    return this.request("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ images }),
    });
  }

  nextImage(session: string): Promise<NextImage> {
    return this.request(`/v1/sessions/${session}/next`);
  }

  imageUrl(session: string, image: string): string {
    return `${this.baseUrl}/v1/sessions/${session}/images/${image}`;
  }

  submitPrompt(
    session: string,
    image: string,
    instance: number,
    point: [number, number],
  ): Promise<PromptResult> {
    return this.request(
      `/v1/sessions/${session}/images/${image}/prompts`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ instance, point }),
      },
    );
  }

  undoLast(session: string, image: string): Promise<PromptResult> {
    return this.request(
      `/v1/sessions/${session}/images/${image}/prompts/last`,
      { method: "DELETE" },
    );
  }

  commit(session: string, image: string): Promise<CommitResponse> {
    return this.request(`/v1/sessions/${session}/images/${image}/commit`, {
      method: "POST",
    });
  }

  exportDataset(session: string): Promise<Record<string, unknown>> {
    return this.request(`/v1/sessions/${session}/export`);
  }
}
