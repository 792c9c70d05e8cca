/** Formatting helpers for the progress dashboard. */
import type { ProgressReport } from "./api";

export interface ProgressRow {
  label: string;
  value: string;
}

export function progressRows(p: ProgressReport): ProgressRow[] {
  return [
    { label: "episodes", value: String(p.episodes) },
    { label: "unreviewed", value: String(p.unreviewed) },
    { label: "in review", value: String(p.in_review) },
    { label: "hard samples", value: String(p.hard_samples) },
    { label: "pending review", value: String(p.pending_review) },
    { label: "edits", value: String(p.edits) },
    {
      label: "jobs",
      value:
        `${p.jobs.Queued} queued / ${p.jobs.Running} running / ` +
        `${p.jobs.Done} done / ${p.jobs.Failed} failed`,
    },
  ];
}

/** Share of episodes someone has started reviewing, in [0, 1]. */
export function reviewedFraction(p: ProgressReport): number {
  return p.episodes === 0 ? 0 : p.in_review / p.episodes;
}
