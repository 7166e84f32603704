"""Parsing of tagged yes/no model responses."""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from entangle.errors import ValidationError


class ParseStatus(str, Enum):
    OK = "ok"
    MISSING_ANSWER = "missing_answer"
    MALFORMED_CONFIDENCE = "malformed_confidence"


@dataclass(frozen=True)
class RawResponse:
    """Full model answer to one (instance, label) question."""

    id: str
    label: str
    text: str

    def __post_init__(self):
        if not self.id or not self.label:
            raise ValidationError("response id and label must be non-empty")


@dataclass(frozen=True)
class ParsedAnswer:
    answer: Optional[str]
    confidence: Optional[int]
    status: ParseStatus

    @property
    def ok(self) -> bool:
        return self.answer is not None


class ResponseParser:
    """Extracts the final ``<answer>`` and ``<confidence>`` tags from a response.

    The LAST occurrence of each tag wins; models often restate tags while reasoning.
    """

    ANSWER_PATTERN = re.compile(r"<answer>(.*?)</answer>", re.IGNORECASE | re.DOTALL)
    CONFIDENCE_PATTERN = re.compile(r"<confidence>(.*?)</confidence>", re.IGNORECASE | re.DOTALL)

    ANSWERS = ("yes", "no")
    CONFIDENCE_RANGE = range(1, 6)

    def parse(self, text: str) -> ParsedAnswer:
        """Never raises; problems are reported through ``status``."""
        text = text if isinstance(text, str) else ""
        answer = self._last_answer(text)
        confidence, confidence_ok = self._last_confidence(text)

        if answer is None:
            return ParsedAnswer(None, confidence, ParseStatus.MISSING_ANSWER)
        if not confidence_ok:
            return ParsedAnswer(answer, None, ParseStatus.MALFORMED_CONFIDENCE)
        return ParsedAnswer(answer, confidence, ParseStatus.OK)

    def _last_answer(self, text: str) -> Optional[str]:
        matches = self.ANSWER_PATTERN.findall(text)
        if not matches:
            return None
        value = matches[-1].strip().lower()
        return value if value in self.ANSWERS else None

    def _last_confidence(self, text: str):
        """Returns ``(confidence, ok)``; an absent tag is fine, a bad value is not."""
        matches = self.CONFIDENCE_PATTERN.findall(text)
        if not matches:
            return None, True
        raw = matches[-1].strip()
        if not raw.isdigit() or int(raw) not in self.CONFIDENCE_RANGE:
            return None, False
        return int(raw), True


_parser = ResponseParser()


def parse_response(text: str) -> ParsedAnswer:
    return _parser.parse(text)
