"""Paper record schema for corpus ingestion.

One PaperRecord per line of the input file. Records are validated with
pydantic at load time, so every downstream module can trust ids, years and
author keys without re-checking them.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PubType(str, Enum):
    """Publication types. Only articles and letters can be focal papers."""

    ARTICLE = "article"
    LETTER = "letter"
    REVIEW = "review"
    EDITORIAL = "editorial"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str | None) -> "PubType":
        """Map a raw label onto a known type; anything unrecognised is OTHER."""
        if not value:
            return cls.OTHER
        try:
            return cls(value.strip().lower())
        except ValueError:
            return cls.OTHER


UNKNOWN_FIELD = "unknown"


class Author(BaseModel):
    """An author reduced to the self-citation matching key.

    The key is (first initial, last name), both lowercased.
    """

    model_config = ConfigDict(frozen=True)

    first_initial: str = Field(min_length=1, max_length=1, description="First given-name initial")
    last_name: str = Field(min_length=1, description="Lowercased last name")

    @classmethod
    def parse(cls, raw: str) -> "Author":
        """Parse ``"J.Smith"``, ``"J. Smith"`` or ``"John Smith"``.

        Raises:
            ValueError: If no last name can be found.
        """
        text = raw.strip()
        if "." in text:
            given, _, last = text.rpartition(".")
        else:
            given, _, last = text.rpartition(" ")
        given, last = given.strip(), last.strip()
        if not last:
            raise ValueError(f"cannot parse author {raw!r}")
        initial = given[0] if given else last[0]
        return cls(first_initial=initial.lower(), last_name=last.lower())

    @property
    def key(self) -> tuple[str, str]:
        return (self.first_initial, self.last_name)

    def __str__(self) -> str:
        return f"{self.first_initial.upper()}.{self.last_name.title()}"


class PaperRecord(BaseModel):
    """One publication of the corpus.

    References are kept as listed (after de-duplication); whether they
    resolve to corpus papers is decided by the index, not here.
    """

    model_config = ConfigDict(frozen=True)

    paper_id: str = Field(min_length=1, description="Opaque unique identifier")
    year: int = Field(description="Publication year")
    field: str = Field(default=UNKNOWN_FIELD, description="Discipline label")
    authors: tuple[Author, ...] = Field(default=(), description="Ordered author list")
    team_size: int | None = Field(default=None, ge=1, description="Number of authors (M)")
    pub_type: PubType = Field(default=PubType.ARTICLE, description="Publication type")
    references: tuple[str, ...] = Field(default=(), description="Cited paper ids")
    venue: str | None = Field(default=None, description="Journal or venue label, if known")

    @model_validator(mode="after")
    def _team_size_matches_authors(self) -> "PaperRecord":
        if self.authors:
            if self.team_size is None:
                object.__setattr__(self, "team_size", len(self.authors))
            elif self.team_size != len(self.authors):
                raise ValueError(
                    f"team_size {self.team_size} does not match {len(self.authors)} authors"
                )
        return self

    @property
    def author_keys(self) -> frozenset[tuple[str, str]]:
        return frozenset(a.key for a in self.authors)


class LoadReport(BaseModel):
    """Counts of soft anomalies found while loading a corpus."""

    papers: int = 0
    resolved_references: int = 0
    dangling_references: int = 0
    future_references: int = 0
    self_references: int = 0
    duplicate_references: int = 0
    out_of_range_papers: int = 0
