from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from .existence import SignConvention

OutputFormat = Literal["text", "json", "csv"]


@dataclass
class ClassifyOptions:
    """Options for enumerating admissible triples."""

    n: int
    p: int | None  # None means every odd prime in scope
    golden: bool
    k3_data: Path | None
    bound: int
    jobs: int
    sign_convention: SignConvention = "t_minus"


@dataclass
class OutputOptions:
    format: OutputFormat = "text"
