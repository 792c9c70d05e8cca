"""The 15 primitive manipulation skills and their description templates."""

from __future__ import annotations

# skill id -> (display name, description template)
SKILLS: dict[str, tuple[str, str]] = {
    "move_with_object": ("Move with Object", "transfer [object] from [position] to [position]"),
    "pick": ("Pick", "pick up [object] [position]"),
    "place": ("Place", "place [object] [position]"),
    "press": ("Press", "press [object] [position]"),
    "push": ("Push", "push [object] [position]"),
    "pull": ("Pull", "pull [object] [position]"),
    "twist": ("Twist", "twist [object] [clockwise/counterclockwise]"),
    "pour": ("Pour", "pour [object] [position]"),
    "fold": ("Fold", "fold [object] [position]"),
    "slide": ("Slide", "slide [object] [position]"),
    "insert": ("Insert", "insert [object] [position]"),
    "shake": ("Shake", "shake [object] [position]"),
    "strike": ("Strike", "strike [object] [position]"),
    "throw": ("Throw", "throw [object] [position]"),
    "other": ("Other", "manipulate [object] [position]"),
}

SKILL_IDS: tuple[str, ...] = tuple(SKILLS)


def skill_template(skill_id: str) -> str:
    """Description template of a skill id, e.g. 'pick up [object] [position]'."""
    return SKILLS[skill_id][1]


def fill_template(skill_id: str, obj: str, position: str, position2: str | None = None) -> str:
    """Instantiate a skill template with concrete object/position nouns."""
    text = skill_template(skill_id)
    if skill_id == "move_with_object":
        return (
            text.replace("[object]", obj, 1)
            .replace("[position]", position, 1)
            .replace("[position]", position2 or position, 1)
        )
    if skill_id == "twist":
        return text.replace("[object]", obj).replace("[clockwise/counterclockwise]", position)
    return text.replace("[object]", obj).replace("[position]", position)
