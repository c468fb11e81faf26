#!/usr/bin/env python3
"""
Judgment store for three-aspect relevance labels
Thread-safe in-memory storage keyed by (query_id, doc_id)
"""

import logging
import threading
from typing import Dict, Iterator, List, Optional, Tuple

from .core import LabelTriple

logger = logging.getLogger(__name__)


class JudgmentStore:
    """Thread-safe judgment store: (query_id, doc_id) -> LabelTriple"""

    def __init__(self, source: str = '<memory>'):
        self.source = source
        self.lock = threading.Lock()
        self.labels: Dict[Tuple[str, str], LabelTriple] = {}
        self.duplicates = 0

    def add(self, query_id: str, doc_id: str, labels: LabelTriple) -> bool:
        """Store labels for a (query, doc); a repeated key replaces the old labels.

        Returns True if the key was new.
        """
        key = (query_id, doc_id)
        with self.lock:
            is_new = key not in self.labels
            if not is_new:
                self.duplicates += 1
                logger.warning('Duplicate judgment for query %s, doc %s in %s; keeping the last one',
                               query_id, doc_id, self.source)
            self.labels[key] = labels
            return is_new

    def get(self, query_id: str, doc_id: str) -> Optional[LabelTriple]:
        """Labels for a (query, doc), or None if unjudged"""
        with self.lock:
            return self.labels.get((query_id, doc_id), None)

    def queries(self) -> List[str]:
        with self.lock:
            return sorted({q for q, _ in self.labels})

    def docs_for(self, query_id: str) -> Dict[str, LabelTriple]:
        """All judged docs of one query (returns a copy)"""
        with self.lock:
            return {d: labels for (q, d), labels in self.labels.items() if q == query_id}

    def items(self) -> List[Tuple[Tuple[str, str], LabelTriple]]:
        """All entries sorted by key (returns a copy)"""
        with self.lock:
            return sorted(self.labels.items())

    def __contains__(self, key: Tuple[str, str]) -> bool:
        with self.lock:
            return key in self.labels

    def __len__(self) -> int:
        with self.lock:
            return len(self.labels)

    def __iter__(self) -> Iterator[Tuple[str, str]]:
        return iter([key for key, _ in self.items()])
