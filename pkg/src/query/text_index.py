import math
from collections import Counter, defaultdict
from typing import Hashable, Iterable, Mapping, Optional

from src.errors import NotFoundError
from src.kb.models import Article, Entity
from src.utils import tokenize


class TextIndex:
    """
    Inverted index with tf * log(1 + N / df) scoring. Query tokens are
    summed in sorted order so scores are reproducible bit for bit.
    """

    def __init__(self, documents: Mapping[Hashable, str]):
        self._tf: dict[Hashable, Counter] = {}
        postings: dict[str, list[tuple[Hashable, int]]] = defaultdict(list)

        for doc_id in sorted(documents):
            counts = Counter(tokenize(documents[doc_id]))
            self._tf[doc_id] = counts
            for token in counts:
                postings[token].append((doc_id, counts[token]))

        self.postings: dict[str, tuple[tuple[Hashable, int], ...]] = {k: tuple(v) for k, v in postings.items()}
        self.doc_lengths = {doc_id: sum(c.values()) for doc_id, c in self._tf.items()}

    @property
    def n_docs(self) -> int:
        return len(self._tf)

    def __contains__(self, doc_id):
        return doc_id in self._tf

    def df(self, token: str) -> int:
        return len(self.postings.get(token, ()))

    def idf(self, token: str) -> float:
        return math.log(1 + self.n_docs / self.df(token))

    def score(self, query: str, doc_id) -> float:
        try:
            counts = self._tf[doc_id]
        except KeyError:
            raise NotFoundError(f'Document {doc_id} is not indexed') from None

        total = 0.0
        for token in sorted(set(tokenize(query))):
            tf = counts.get(token, 0)
            if tf:
                total += tf * self.idf(token)

        return total

    def rank(self, query: str, candidates: Optional[Iterable] = None, keep_zero: bool = False) -> list[tuple]:
        """
        Scores candidates (all documents by default), sorted by score desc then id.
        Zero-score documents are only returned when keep_zero is set.
        """
        pool = None if candidates is None else set(candidates)
        scores: dict = {}
        for token in sorted(set(tokenize(query))):
            if token not in self.postings:
                continue

            idf = self.idf(token)
            for doc_id, tf in self.postings[token]:
                if pool is not None and doc_id not in pool:
                    continue
                scores[doc_id] = scores.get(doc_id, 0.0) + tf * idf

        if keep_zero:
            for doc_id in (pool if pool is not None else self._tf):
                if doc_id in self._tf:
                    scores.setdefault(doc_id, 0.0)

        return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def build_text_index(articles: Mapping[int, Article]) -> TextIndex:
    return TextIndex({pmid: a.text for pmid, a in articles.items()})


def build_name_index(entities: Mapping[str, Entity]) -> TextIndex:
    return TextIndex({eid: e.name for eid, e in entities.items()})


def score_text(index: TextIndex, query: str, doc_id) -> float:
    return index.score(query, doc_id)
