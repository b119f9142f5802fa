from dataclasses import dataclass
from datetime import date


@dataclass(frozen=True)
class Article:
    pmid: int
    title: str
    abstract: str
    pub_date: date
    journal: str = ''

    @property
    def text(self) -> str:
        return f'{self.title} {self.abstract}'.strip()

    def to_dict(self) -> dict:
        return {
            'pmid': self.pmid,
            'title': self.title,
            'abstract': self.abstract,
            'pub_date': self.pub_date.isoformat(),
            'journal': self.journal,
        }

    @classmethod
    def from_dict(cls, d: dict):
        return cls(
            pmid=int(d['pmid']),
            title=d.get('title') or '',
            abstract=d.get('abstract') or '',
            pub_date=date.fromisoformat(d['pub_date']),
            journal=d.get('journal') or '',
        )
