/** Typed client for the curation service HTTP API.
 *
 * Every response is validated with zod before it reaches the view model, so
 * a server/client drift fails loudly instead of rendering garbage.
 */
import { z } from "zod";

export const EDIT_KINDS = [
  "SetContactFrame",
  "AddClip",
  "EditClipText",
  "DeleteClip",
  "AcceptMask",
  "RejectMask",
  "SetGlobalDescription",
  "BindObjectToClip",
] as const;
export type EditKind = (typeof EDIT_KINDS)[number];

export const JOB_KINDS = ["Segment", "PreAnnotate", "VideoOnset"] as const;
export type JobKind = (typeof JOB_KINDS)[number];

export const OVERLAY_LAYERS = ["object", "gripper", "affordance", "trace"] as const;
export type OverlayLayer = (typeof OVERLAY_LAYERS)[number];

const Int = z.number().int();

export const RleMaskSchema = z.object({
  width: Int,
  height: Int,
  counts: z.array(Int),
});

export const MaskEntrySchema = z.object({ frame: Int, rle: RleMaskSchema });

export const ContactFrameSchema = z.object({ frame: Int, object_id: z.string() });

export const ClipSchema = z.object({
  start_frame: Int,
  end_frame: Int,
  skill: z.string(),
  description: z.string(),
  object_id: z.string().optional(),
});

export const AnnotationsSchema = z.object({
  global_description: z.string(),
  clips: z.array(ClipSchema),
  masks: z.record(z.string(), z.array(MaskEntrySchema)),
  contact_frames: z.array(ContactFrameSchema),
});

// Only the manifest fields the UI reads; unknown keys are stripped.
export const ManifestSchema = z.object({
  episode_id: z.string(),
  num_frames: Int,
  camera: z.object({ width: Int, height: Int }),
  annotations: AnnotationsSchema,
});

export const EpisodeSummarySchema = z.object({
  episode_id: z.string(),
  split: z.string(),
  status: z.string(),
  revision: Int,
  num_frames: Int,
  num_clips: Int,
  pending_review: Int,
  hard_sample: z.boolean(),
  global_description: z.string(),
});

export const EpisodePageSchema = z.object({
  episodes: z.array(EpisodeSummarySchema),
  total: Int,
  page: Int,
  page_size: Int,
});

export const PendingEntrySchema = z.object({
  pending_id: Int,
  kind: z.string(),
  result: z.record(z.string(), z.unknown()),
  job_id: z.string(),
});

export const EpisodeDetailSchema = z.object({
  episode_id: z.string(),
  revision: Int,
  split: z.string(),
  status: z.string(),
  hard_sample: z.boolean(),
  reject_streak: Int,
  pending: z.array(PendingEntrySchema),
  manifest: ManifestSchema,
});

export const EditAckSchema = z.object({ episode_id: z.string(), revision: Int });

export const JobAcceptedSchema = z.object({ job_id: z.string(), status: z.string() });

export const JobStatusSchema = z.object({
  job_id: z.string(),
  kind: z.string(),
  episode_id: z.string(),
  status: z.enum(["Queued", "Running", "Done", "Failed"]),
  result: z.record(z.string(), z.unknown()).nullable(),
  error: z.string().nullable(),
  retries: Int,
  pending_id: Int.nullable(),
});

export const ProgressSchema = z.object({
  episodes: Int,
  unreviewed: Int,
  in_review: Int,
  hard_samples: Int,
  pending_review: Int,
  edits: Int,
  jobs: z.object({ Queued: Int, Running: Int, Done: Int, Failed: Int }),
});

// The result payload of a finished Segment job, for mask previews.
export const SegmentResultSchema = z.object({
  frame: Int,
  object_id: z.string(),
  rle: RleMaskSchema,
});

export type RleMask = z.infer<typeof RleMaskSchema>;
export type MaskEntry = z.infer<typeof MaskEntrySchema>;
export type ContactFrame = z.infer<typeof ContactFrameSchema>;
export type Clip = z.infer<typeof ClipSchema>;
export type Manifest = z.infer<typeof ManifestSchema>;
export type EpisodeSummary = z.infer<typeof EpisodeSummarySchema>;
export type EpisodePage = z.infer<typeof EpisodePageSchema>;
export type PendingEntry = z.infer<typeof PendingEntrySchema>;
export type EpisodeDetail = z.infer<typeof EpisodeDetailSchema>;
export type EditAck = z.infer<typeof EditAckSchema>;
export type JobStatus = z.infer<typeof JobStatusSchema>;
export type ProgressReport = z.infer<typeof ProgressSchema>;

/** HTTP error carrying the status code and the service's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface EpisodeQuery {
  split?: string;
  status?: string;
  page?: number;
  pageSize?: number;
}

export class ReviewApi {
  /**
   * @param baseUrl service root, e.g. "http://127.0.0.1:8321"; empty string
   *   means same-origin (the vite dev proxy setup).
   * @param editorId recorded in the edit log for every accepted edit.
   */
  constructor(
    readonly baseUrl: string,
    readonly editorId: string = "reviewer",
  ) {}

  async listEpisodes(query: EpisodeQuery = {}): Promise<EpisodePage> {
    const params = new URLSearchParams();
    if (query.split) params.set("split", query.split);
    if (query.status) params.set("status", query.status);
    if (query.page) params.set("page", String(query.page));
    if (query.pageSize) params.set("page_size", String(query.pageSize));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return EpisodePageSchema.parse(await this.json(`/episodes${suffix}`));
  }

  async getEpisode(episodeId: string): Promise<EpisodeDetail> {
    return EpisodeDetailSchema.parse(
      await this.json(`/episodes/${encodeURIComponent(episodeId)}`),
    );
  }

  /** One optimistic edit; the server replies 409 when `revision` is stale. */
  async postEdit(
    episodeId: string,
    kind: EditKind,
    payload: Record<string, unknown>,
    revision: number,
  ): Promise<EditAck> {
    const body = { kind, payload, revision, editor_id: this.editorId };
    return EditAckSchema.parse(
      await this.json(`/episodes/${encodeURIComponent(episodeId)}/edits`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async submitJob(
    episodeId: string,
    kind: JobKind,
    payload: Record<string, unknown>,
  ): Promise<string> {
    const accepted = JobAcceptedSchema.parse(
      await this.json(`/episodes/${encodeURIComponent(episodeId)}/jobs`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ kind, payload }),
      }),
    );
    return accepted.job_id;
  }

  async getJob(jobId: string): Promise<JobStatus> {
    return JobStatusSchema.parse(await this.json(`/jobs/${encodeURIComponent(jobId)}`));
  }

  /** Poll a job until it is Done or Failed. */
  async waitForJob(jobId: string, timeoutMs = 30_000, intervalMs = 100): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "Done" || job.status === "Failed") return job;
      if (Date.now() > deadline) throw new Error(`job ${jobId} still ${job.status}`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  async progress(): Promise<ProgressReport> {
    return ProgressSchema.parse(await this.json("/progress"));
  }

  frameUrl(episodeId: string, frame: number): string {
    return `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/frames/${frame}`;
  }

  /** Server-rendered overlay; no layers means the server draws all of them. */
  overlayUrl(episodeId: string, frame: number, layers: readonly OverlayLayer[] = []): string {
    const base = `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/overlay/${frame}`;
    return layers.length > 0 ? `${base}?layers=${layers.join(",")}` : base;
  }

  /** Fetch an image endpoint; used by tests to check what the viewport embeds. */
  async fetchBinary(url: string): Promise<Uint8Array> {
    const res = await fetch(url);
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return new Uint8Array(await res.arrayBuffer());
  }

  private async json(path: string, init?: RequestInit): Promise<unknown> {
    const res = await fetch(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let detail = "";
      try {
        const body: unknown = await res.json();
        if (body && typeof body === "object" && "detail" in body) {
          detail = String((body as { detail: unknown }).detail);
        } else {
          detail = JSON.stringify(body);
        }
      } catch {
        detail = res.statusText;
      }
      throw new ApiError(res.status, detail);
    }
    return res.json();
  }
}
