"""The report every management command prints."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from django.utils import timezone

from common.conf import needlecomp_config
from common.serializers import inputs_digest

EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


@dataclass
class Report:
    """
    Command echo, results and verdict of one run.

    ``passed`` is ``None`` for commands that compute without checking
    anything. ``generated_at`` is left out of the digest so two runs on the
    same inputs share it.
    """

    command: str
    arguments: Dict[str, Any]
    results: Dict[str, Any]
    passed: Optional[bool] = None
    warnings: List[str] = field(default_factory=list)
    input_files: Dict[str, str] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=needlecomp_config)
    generated_at: str = field(default_factory=lambda: timezone.now().isoformat())

    @property
    def inputs_digest(self) -> str:
        return inputs_digest({
            'command': self.command,
            'arguments': self.arguments,
            'input_files': self.input_files,
            'config': self.config,
        })

    def to_json(self):
        return {
            'command': self.command,
            'arguments': self.arguments,
            'inputs_digest': self.inputs_digest,
            'results': self.results,
            'passed': self.passed,
            'warnings': self.warnings,
            'input_files': self.input_files,
            'config': self.config,
            'generated_at': self.generated_at,
        }
