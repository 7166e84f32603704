"""Utility modules."""

from entangle.utils.response_parser import (
    ParsedAnswer,
    ParseStatus,
    RawResponse,
    ResponseParser,
    parse_response,
)

__all__ = ["ParsedAnswer", "ParseStatus", "RawResponse", "ResponseParser", "parse_response"]
