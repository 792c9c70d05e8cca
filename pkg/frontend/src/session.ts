/** View model for reviewing one episode.
 *
 * All annotation state lives on the server: after every accepted edit the
 * session re-fetches the episode, so whatever the UI shows can be replayed
 * from the server's edit log. Each user interaction that mutates anything
 * maps to exactly one POST to the edits endpoint.
 *
 * Revision handling is optimistic. Edits carry the revision of the snapshot
 * they were based on; when the server answers 409 the edit is parked in
 * `conflict` and nothing else is sent until the reviewer explicitly retries
 * on a fresh snapshot or discards the edit.
 */
import {
  ApiError,
  type Clip,
  type ContactFrame,
  type EditKind,
  type EpisodeDetail,
  type JobStatus,
  type MaskEntry,
  type OverlayLayer,
  type PendingEntry,
  ReviewApi,
} from "./api";
import { type ClipDraft, draftToPayload, emptyDraft, validateClipDraft } from "./clipForm";
import { clampFrame, stepFrame } from "./scrubber";

export interface EditDescriptor {
  kind: EditKind;
  payload: Record<string, unknown>;
}

export type EditOutcome =
  | { applied: true; revision: number }
  | { applied: false; reason: "conflict" | "invalid"; detail: string };

export interface ConflictState {
  edit: EditDescriptor;
  staleRevision: number;
  detail: string;
}

export class ReviewSession {
  detail: EpisodeDetail | null = null;
  currentFrame = 0;
  activeLayers: OverlayLayer[] = ["object", "gripper"];
  conflict: ConflictState | null = null;
  clipDraft: ClipDraft = emptyDraft();

  private listeners: Array<() => void> = [];

  constructor(
    readonly api: ReviewApi,
    readonly episodeId: string,
  ) {}

  /** Re-render hook for the components; returns the unsubscribe function. */
  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((fn) => fn !== listener);
    };
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  /** Fetch the current server snapshot; the only way state enters the UI. */
  async load(): Promise<void> {
    this.detail = await this.api.getEpisode(this.episodeId);
    this.currentFrame = clampFrame(this.currentFrame, this.frameCount);
    this.notify();
  }

  private get snapshot(): EpisodeDetail {
    if (this.detail === null) throw new Error("call load() before using the session");
    return this.detail;
  }

  get revision(): number {
    return this.snapshot.revision;
  }

  get frameCount(): number {
    return this.detail === null ? 0 : this.detail.manifest.num_frames;
  }

  get hardSample(): boolean {
    return this.snapshot.hard_sample;
  }

  get rejectStreak(): number {
    return this.snapshot.reject_streak;
  }

  get clips(): readonly Clip[] {
    return this.snapshot.manifest.annotations.clips;
  }

  get contactFrames(): readonly ContactFrame[] {
    return this.snapshot.manifest.annotations.contact_frames;
  }

  get globalDescription(): string {
    return this.snapshot.manifest.annotations.global_description;
  }

  get objectMasks(): Readonly<Record<string, MaskEntry[]>> {
    return this.snapshot.manifest.annotations.masks;
  }

  /** Job results waiting for an accept/reject decision. */
  get pendingMasks(): PendingEntry[] {
    return this.snapshot.pending.filter((p) => p.kind === "Segment");
  }

  // --- scrubber and overlay --------------------------------------------------

  setFrame(frame: number): void {
    this.currentFrame = clampFrame(frame, this.frameCount);
    this.notify();
  }

  step(delta: number): void {
    this.currentFrame = stepFrame(this.currentFrame, delta, this.frameCount);
    this.notify();
  }

  toggleLayer(layer: OverlayLayer): void {
    this.activeLayers = this.activeLayers.includes(layer)
      ? this.activeLayers.filter((l) => l !== layer)
      : [...this.activeLayers, layer];
    this.notify();
  }

  frameUrl(): string {
    return this.api.frameUrl(this.episodeId, this.currentFrame);
  }

  /** The viewport embeds this URL; all overlay drawing happens server side. */
  overlayUrl(): string {
    return this.api.overlayUrl(this.episodeId, this.currentFrame, this.activeLayers);
  }

  // --- edits -------------------------------------------------------------------

  markContact(objectId: string): Promise<EditOutcome> {
    return this.sendEdit("SetContactFrame", {
      frame: this.currentFrame,
      object_id: objectId,
    });
  }

  /** Submit the clip form; refuses locally when the draft is invalid. */
  async addClip(): Promise<EditOutcome> {
    const errors = validateClipDraft(this.clipDraft, this.frameCount, this.clips);
    if (errors.length > 0) {
      return { applied: false, reason: "invalid", detail: errors.join("; ") };
    }
    const outcome = await this.sendEdit("AddClip", draftToPayload(this.clipDraft));
    if (outcome.applied) {
      this.clipDraft = emptyDraft();
      this.notify();
    }
    return outcome;
  }

  deleteClip(index: number): Promise<EditOutcome> {
    return this.sendEdit("DeleteClip", { clip_index: index });
  }

  editClipText(index: number, description: string): Promise<EditOutcome> {
    return this.sendEdit("EditClipText", { clip_index: index, description });
  }

  setGlobalDescription(text: string): Promise<EditOutcome> {
    return this.sendEdit("SetGlobalDescription", { text });
  }

  bindObjectToClip(index: number, objectId: string): Promise<EditOutcome> {
    return this.sendEdit("BindObjectToClip", { clip_index: index, object_id: objectId });
  }

  acceptPending(pendingId: number): Promise<EditOutcome> {
    return this.sendEdit("AcceptMask", { pending_id: pendingId });
  }

  rejectPending(pendingId: number): Promise<EditOutcome> {
    return this.sendEdit("RejectMask", { pending_id: pendingId });
  }

  rejectMask(objectId: string, frame: number): Promise<EditOutcome> {
    return this.sendEdit("RejectMask", { object_id: objectId, frame });
  }

  // --- conflict dialog --------------------------------------------------------

  /** Drop the parked edit and keep reviewing on the stale snapshot. */
  discardConflict(): void {
    this.conflict = null;
    this.notify();
  }

  /** Reviewer chose retry: reload the snapshot, then resend the parked edit. */
  async reloadAndRetry(): Promise<EditOutcome> {
    const parked = this.conflict;
    if (parked === null) throw new Error("no conflict to retry");
    this.conflict = null;
    await this.load();
    return this.sendEdit(parked.edit.kind, parked.edit.payload);
  }

  // --- assistance jobs ----------------------------------------------------------

  /**
   * Queue a segmentation from prompt points on the current frame and wait
   * for the result. The mask lands in `pendingMasks`, never in the manifest,
   * until the reviewer accepts it.
   */
  async requestSegmentMask(
    objectId: string,
    points: ReadonlyArray<readonly [number, number]>,
    radius?: number,
  ): Promise<JobStatus> {
    const payload: Record<string, unknown> = {
      frame: this.currentFrame,
      object_id: objectId,
      points: points.map((p) => [p[0], p[1]]),
    };
    if (radius !== undefined) payload.radius = radius;
    return this.runJob("Segment", payload);
  }

  /** Ask for a plan suggestion for the task text. */
  requestPlan(task: string): Promise<JobStatus> {
    return this.runJob("PreAnnotate", { task, frame: this.currentFrame });
  }

  /** Ask for the first index where the signal exceeds the threshold. */
  requestOnset(signal: readonly number[], threshold: number): Promise<JobStatus> {
    return this.runJob("VideoOnset", { signal: [...signal], threshold });
  }

  private async runJob(
    kind: "Segment" | "PreAnnotate" | "VideoOnset",
    payload: Record<string, unknown>,
  ): Promise<JobStatus> {
    const jobId = await this.api.submitJob(this.episodeId, kind, payload);
    const job = await this.api.waitForJob(jobId);
    await this.load();
    return job;
  }

  // --- internals ----------------------------------------------------------------

  private async sendEdit(
    kind: EditKind,
    payload: Record<string, unknown>,
  ): Promise<EditOutcome> {
    const basis = this.snapshot.revision;
    if (this.conflict !== null) {
      return {
        applied: false,
        reason: "invalid",
        detail: "resolve the open conflict before sending more edits",
      };
    }
    try {
      const ack = await this.api.postEdit(this.episodeId, kind, payload, basis);
      await this.load();
      return { applied: true, revision: ack.revision };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.conflict = { edit: { kind, payload }, staleRevision: basis, detail: err.detail };
        this.notify();
        return { applied: false, reason: "conflict", detail: err.detail };
      }
      if (err instanceof ApiError && err.status === 422) {
        return { applied: false, reason: "invalid", detail: err.detail };
      }
      throw err;
    }
  }
}
