/** Clip form state and the in-form checks mirroring the server invariants. */
import type { Clip } from "./api";
import { SKILL_IDS } from "./skills";

export interface ClipDraft {
  startFrame: number | null;
  endFrame: number | null;
  skill: string;
  description: string;
  objectId: string | null;
}

export function emptyDraft(): ClipDraft {
  return { startFrame: null, endFrame: null, skill: "pick", description: "", objectId: null };
}

function isFrameIndex(value: number | null): value is number {
  return value !== null && Number.isInteger(value);
}

/**
 * Problems that would make the server reject the draft with a 422.
 *
 * Args mirror what the server checks: the episode frame count and the clips
 * already on the episode (a new clip may touch a neighbour's boundary frame
 * but not overlap it). An empty list means the draft can be submitted.
 */
export function validateClipDraft(
  draft: ClipDraft,
  frameCount: number,
  existing: readonly Clip[] = [],
): string[] {
  const errors: string[] = [];
  if (!isFrameIndex(draft.startFrame)) errors.push("start frame is required");
  if (!isFrameIndex(draft.endFrame)) errors.push("end frame is required");
  if (isFrameIndex(draft.startFrame) && isFrameIndex(draft.endFrame)) {
    const start = draft.startFrame;
    const end = draft.endFrame;
    if (start >= end) errors.push(`start ${start} must be before end ${end}`);
    if (start < 0 || end > frameCount - 1) {
      errors.push(`frames must lie in [0, ${frameCount - 1}]`);
    }
    for (const clip of existing) {
      if (start < clip.end_frame && clip.start_frame < end) {
        errors.push(`overlaps the ${clip.skill} clip [${clip.start_frame}, ${clip.end_frame}]`);
        break;
      }
    }
  }
  if (!SKILL_IDS.includes(draft.skill)) errors.push(`unknown skill '${draft.skill}'`);
  if (draft.description.trim() === "") errors.push("description is required");
  return errors;
}

/** Edit payload for a valid draft; object_id is sent only when bound. */
export function draftToPayload(draft: ClipDraft): Record<string, unknown> {
  const payload: Record<string, unknown> = {
    start_frame: draft.startFrame,
    end_frame: draft.endFrame,
    skill: draft.skill,
    description: draft.description.trim(),
  };
  if (draft.objectId) payload.object_id = draft.objectId;
  return payload;
}
