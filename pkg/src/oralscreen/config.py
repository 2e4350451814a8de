"""Questionnaire schema and run-configuration helpers.

The questionnaire is a versioned artifact: the service validates submitted
answers against it and the model's one-hot prior width is derived from it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError

QUESTIONNAIRE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    choices: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.choices) < 2:
            raise ConfigError(f"question {self.id!r} needs at least two choices")


@dataclass(frozen=True)
class QuestionnaireSchema:
    """Seven multiple-choice questions covering habits and symptom history."""

    questions: tuple[Question, ...]
    schema_version: int = QUESTIONNAIRE_SCHEMA_VERSION

    def __post_init__(self) -> None:
        ids = [q.id for q in self.questions]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate question ids in questionnaire schema")

    @property
    def choice_counts(self) -> tuple[int, ...]:
        return tuple(len(q.choices) for q in self.questions)

    @property
    def one_hot_width(self) -> int:
        return sum(self.choice_counts)

    def question_index(self, question_id: str) -> int:
        for i, q in enumerate(self.questions):
            if q.id == question_id:
                return i
        raise ConfigError(f"unknown question {question_id!r}")

    def validate_answer(self, question_id: str, choice: int) -> None:
        q = self.questions[self.question_index(question_id)]
        if not isinstance(choice, int) or isinstance(choice, bool):
            raise ConfigError(f"question {q.id!r}: answer must be a choice index")
        if not 0 <= choice < len(q.choices):
            raise ConfigError(
                f"question {q.id!r}: choice {choice} out of range "
                f"(has {len(q.choices)} choices)"
            )

    def ordered_answers(self, answers: Mapping[str, int]) -> tuple[int, ...]:
        """Return answers as a tuple in schema order; all questions required."""
        for qid, choice in answers.items():
            self.validate_answer(qid, choice)
        missing = [q.id for q in self.questions if q.id not in answers]
        if missing:
            raise ConfigError(f"unanswered questions: {', '.join(missing)}")
        return tuple(int(answers[q.id]) for q in self.questions)

    def is_complete(self, answers: Mapping[str, int]) -> bool:
        return all(q.id in answers for q in self.questions)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "questions": [
                {"id": q.id, "text": q.text, "choices": list(q.choices)}
                for q in self.questions
            ],
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "QuestionnaireSchema":
        return cls(
            schema_version=int(payload.get("schema_version", 1)),
            questions=tuple(
                Question(q["id"], q["text"], tuple(q["choices"]))
                for q in payload["questions"]
            ),
        )


#: The first five questions line up with the five conditions in canonical
#: order; the synthetic prior generator exploits that pairing.
DEFAULT_QUESTIONNAIRE = QuestionnaireSchema(
    questions=(
        Question(
            "gum_bleeding",
            "How often do your gums bleed when you brush or floss?",
            ("never", "sometimes", "often"),
        ),
        Question(
            "tooth_pain",
            "Do you feel tooth pain with hot, cold, or sweet food?",
            ("never", "sometimes", "often"),
        ),
        Question(
            "rough_buildup",
            "Do you feel a hard, rough buildup near the gum line?",
            ("no", "in places", "widespread"),
        ),
        Question(
            "tooth_film",
            "Do your teeth feel coated or filmy by the end of the day?",
            ("no", "sometimes", "most days"),
        ),
        Question(
            "staining",
            "Have your teeth become visibly stained or darker over time?",
            ("no", "slightly", "clearly"),
        ),
        Question(
            "brushing",
            "How often do you brush your teeth?",
            ("twice a day or more", "once a day", "less than daily"),
        ),
        Question(
            "last_visit",
            "When was your last dental visit?",
            (
                "within 6 months",
                "within a year",
                "one to three years ago",
                "more than three years ago",
            ),
        ),
    )
)

DEFAULT_CHOICE_COUNTS = DEFAULT_QUESTIONNAIRE.choice_counts


def config_hash(payload: Any) -> str:
    """Stable short hash of a JSON-serializable configuration object."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_yaml_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        payload = yaml.safe_load(fh)
    if payload is None:
        return {}
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    return payload


def save_yaml_config(payload: Mapping, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(dict(payload), fh, sort_keys=True)
