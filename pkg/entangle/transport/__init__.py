"""File transport."""

from entangle.transport.file_transport import FileTransport

__all__ = ["FileTransport"]
