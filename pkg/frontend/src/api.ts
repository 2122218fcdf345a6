import {
  DisagreementReport,
  Landmarks,
  NUM_LANDMARKS,
  TaskDetail,
  TaskStatus,
  TaskSummary,
} from "./types.js";

export class ConflictError extends Error {
  constructor(message: string, readonly detail: string) {
    super(message);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

interface WriteResult {
  version: number;
  status: TaskStatus;
}

/** Thin typed client for the annotation service; all writes quote a version. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly doFetch: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.doFetch(this.base + path, init);
    if (resp.status === 409) {
      const body = await resp.json();
      throw new ConflictError(`conflict on ${path}`, String(body.detail ?? ""));
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `${init?.method ?? "GET"} ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  listTasks(status?: TaskStatus): Promise<TaskSummary[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request(`/api/tasks${query}`);
  }

  getTask(id: string): Promise<TaskDetail> {
    return this.request(`/api/tasks/${encodeURIComponent(id)}`);
  }

  imageUrl(id: string): string {
    return `${this.base}/api/images/${encodeURIComponent(id)}`;
  }

  saveAnnotation(
    id: string,
    labeler: string,
    version: number,
    points: Landmarks,
  ): Promise<WriteResult> {
    if (points.length !== NUM_LANDMARKS) {
      throw new Error(`annotation must have ${NUM_LANDMARKS} slots, got ${points.length}`);
    }
    return this.request(
      `/api/tasks/${encodeURIComponent(id)}/annotations/${encodeURIComponent(labeler)}`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ version, points }),
      },
    );
  }

  getDisagreements(id: string, tolerance = 2): Promise<DisagreementReport> {
    return this.request(
      `/api/tasks/${encodeURIComponent(id)}/disagreements?tolerance=${tolerance}`,
    );
  }

  merge(id: string, version: number, tolerance = 2): Promise<WriteResult> {
    return this.request(`/api/tasks/${encodeURIComponent(id)}/merge`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ version, tolerance }),
    });
  }

  complete(
    id: string,
    version: number,
  ): Promise<WriteResult & { completed: Landmarks }> {
    return this.request(`/api/tasks/${encodeURIComponent(id)}/complete`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ version }),
    });
  }

  predictions(id: string): Promise<{ points: Landmarks }> {
    return this.request(`/api/tasks/${encodeURIComponent(id)}/predictions`);
  }
}
