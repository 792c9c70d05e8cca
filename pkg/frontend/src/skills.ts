/** The primitive skills the service accepts on clips, with display names. */
export const SKILLS: ReadonlyArray<{ id: string; label: string }> = [
  { id: "move_with_object", label: "Move with Object" },
  { id: "pick", label: "Pick" },
  { id: "place", label: "Place" },
  { id: "press", label: "Press" },
  { id: "push", label: "Push" },
  { id: "pull", label: "Pull" },
  { id: "twist", label: "Twist" },
  { id: "pour", label: "Pour" },
  { id: "fold", label: "Fold" },
  { id: "slide", label: "Slide" },
  { id: "insert", label: "Insert" },
  { id: "shake", label: "Shake" },
  { id: "strike", label: "Strike" },
  { id: "throw", label: "Throw" },
  { id: "other", label: "Other" },
];

export const SKILL_IDS: readonly string[] = SKILLS.map((s) => s.id);
