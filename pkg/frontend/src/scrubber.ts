/** Pure frame-scrubber math shared by the component and the session. */
import type { Clip, ContactFrame } from "./api";

export function clampFrame(frame: number, frameCount: number): number {
  if (frameCount <= 0) return 0;
  const k = Math.round(frame);
  return Math.min(Math.max(k, 0), frameCount - 1);
}

export function stepFrame(frame: number, delta: number, frameCount: number): number {
  return clampFrame(frame + delta, frameCount);
}

/** Position of a frame on the timeline strip, in percent of its width. */
export function positionPct(frame: number, frameCount: number): number {
  if (frameCount < 2) return 0;
  return (clampFrame(frame, frameCount) / (frameCount - 1)) * 100;
}

export interface ClipSpan {
  leftPct: number;
  widthPct: number;
  skill: string;
}

/** Clip bands drawn under the scrubber. */
export function clipSpans(clips: readonly Clip[], frameCount: number): ClipSpan[] {
  return clips.map((clip) => {
    const left = positionPct(clip.start_frame, frameCount);
    return {
      leftPct: left,
      widthPct: positionPct(clip.end_frame, frameCount) - left,
      skill: clip.skill,
    };
  });
}

export interface ContactMark {
  leftPct: number;
  frame: number;
  objectId: string;
}

/** Contact ticks drawn on the scrubber. */
export function contactMarks(
  contacts: readonly ContactFrame[],
  frameCount: number,
): ContactMark[] {
  return contacts.map((c) => ({
    leftPct: positionPct(c.frame, frameCount),
    frame: c.frame,
    objectId: c.object_id,
  }));
}
