# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import ValidationError

from auxcell.ac_types import SearchHeaderModel, SearchLogError, SearchRecordModel
from auxcell.genome import canonicalize, decode, encode


class SearchLog:
    """
    JSONL search log: one header line with the effective settings, then one line per architecture
    in completion order.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def write_header(self, header: SearchHeaderModel) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            f.write(header.model_dump_json() + "\n")

    def append(self, record: SearchRecordModel) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(record.model_dump_json() + "\n")
            f.flush()

    def read(self, strict: bool = True, complete: bool = False) -> Tuple[SearchHeaderModel, List[SearchRecordModel]]:
        """
        Parses the log.

        Args:
            strict: a partial or malformed last line is an error. Otherwise it is dropped
                with a warning, as left behind by an interrupted run.
            complete: also require as many architecture rows as the header announces.

        Raises:
            SearchLogError: missing header, malformed rows, duplicated indices or a truncated log.
        """
        if not self.path.exists():
            raise SearchLogError(f"{self.path}: search log not found")
        text = self.path.read_text(encoding="utf-8")
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        elif lines:
            if strict:
                raise SearchLogError(f"{self.path}: truncated log, the last line has no line ending")
            logging.warning(f"{self.path}: dropping the partial last line of an interrupted run")
            lines.pop()

        if not lines:
            raise SearchLogError(f"{self.path}: empty search log")

        try:
            header = SearchHeaderModel(**json.loads(lines[0]))
        except (json.JSONDecodeError, ValidationError, TypeError) as e:
            raise SearchLogError(f"{self.path}: the first line is not a search log header: {e}") from e

        records: List[SearchRecordModel] = []
        for number, line in enumerate(lines[1:], start=2):
            try:
                records.append(SearchRecordModel(**json.loads(line)))
            except (json.JSONDecodeError, ValidationError, TypeError) as e:
                if not strict and number == len(lines):
                    logging.warning(f"{self.path}: dropping the malformed last line {number}")
                    break
                raise SearchLogError(f"{self.path}: malformed row on line {number}: {e}") from e

        indices = [r.index for r in records]
        if len(set(indices)) != len(indices):
            raise SearchLogError(f"{self.path}: an architecture index appears twice")

        if complete:
            expected = header.settings.get("search", {}).get("total_architectures")
            if expected is not None and len(records) < expected:
                raise SearchLogError(f"{self.path}: truncated log, {len(records)} of {expected} architectures")
        return header, records

    def rewrite(self, header: SearchHeaderModel, records: List[SearchRecordModel]) -> None:
        """Rewrites the log from parsed rows, used to drop a partial line before resuming."""
        self.write_header(header)
        for record in records:
            self.append(record)


def top_k(records: List[SearchRecordModel], k: int) -> List[Tuple[str, float]]:
    """
    The k best distinct canonical genomes by final reward, failed architectures excluded.

    Returns:
        List[Tuple[str, float]]: (canonical genome text, final reward), best first.
    """
    best: dict = {}
    for record in records:
        if record.failed:
            continue
        text = encode(canonicalize(decode(record.genome)))
        if text not in best or record.final_reward > best[text]:
            best[text] = record.final_reward
    ranked = sorted(best.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def controller_path(log_path: Union[str, Path], explicit: Optional[Union[str, Path]] = None) -> Path:
    """Controller checkpoint that goes with a log, next to it unless given."""
    return Path(explicit) if explicit is not None else Path(f"{log_path}.controller")
