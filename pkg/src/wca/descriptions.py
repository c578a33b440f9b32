"""Class description catalogs and label prompt templating.

Description sets are consumed from JSON files (class name mapped to an
array of description strings, the format published description collections
use); generating them is out of scope here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, IngestionError

DEFAULT_TEMPLATE = "a photo of a {}"


@dataclass(frozen=True)
class DescriptionSet:
    """A class label with its ordered description strings."""

    label: str
    descriptions: tuple[str, ...]

    def __post_init__(self):
        if len(self.descriptions) < 1:
            raise IngestionError(f"class {self.label!r} has no descriptions")
        for d in self.descriptions:
            if not isinstance(d, str) or not d:
                raise IngestionError(f"class {self.label!r} has an empty or non-string description")


@dataclass
class LabelCatalog:
    """Ordered description sets for every class, plus the label prompt template."""

    classes: list[DescriptionSet]
    template: str = DEFAULT_TEMPLATE
    _index: dict[str, DescriptionSet] = field(init=False, repr=False)

    def __post_init__(self):
        labels = [c.label for c in self.classes]
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise IngestionError(f"duplicate class labels: {dupes}")
        self._index = {c.label: c for c in self.classes}

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.classes]

    def get(self, label: str) -> DescriptionSet:
        try:
            return self._index[label]
        except KeyError:
            raise IngestionError(f"label {label!r} is not in the catalog") from None

    def __len__(self) -> int:
        return len(self.classes)

    def prompt_for(self, label: str) -> str:
        return label_prompt(label, self.template)

    def to_mapping(self) -> dict[str, list[str]]:
        """Label -> descriptions mapping, mirroring the file format."""
        return {c.label: list(c.descriptions) for c in self.classes}


def label_prompt(label: str, template: str = DEFAULT_TEMPLATE) -> str:
    """Substitute the label into a template holding exactly one ``{}``."""
    if template.count("{}") != 1:
        raise ConfigError(
            f"template must contain exactly one {{}} placeholder, got {template!r}"
        )
    return template.replace("{}", label)


def load_descriptions(
    path, truncate_m: int | None = None, template: str = DEFAULT_TEMPLATE
) -> LabelCatalog:
    """Load a class -> descriptions JSON file, preserving insertion order.

    ``truncate_m`` keeps only the first descriptions of each class, which
    supports sweeps over the description count.
    """
    if truncate_m is not None and truncate_m < 1:
        raise ConfigError(f"truncate_m must be >= 1, got {truncate_m}")
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestionError(f"cannot read description file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"malformed JSON in {path}: {exc}") from exc
    return catalog_from_mapping(raw, truncate_m=truncate_m, template=template)


def catalog_from_mapping(
    raw, truncate_m: int | None = None, template: str = DEFAULT_TEMPLATE
) -> LabelCatalog:
    if not isinstance(raw, dict):
        raise IngestionError("description file must be a JSON object of class -> [descriptions]")
    if not raw:
        raise IngestionError("description file contains no classes")
    classes = []
    for label, descs in raw.items():
        if not isinstance(label, str) or not label:
            raise IngestionError(f"invalid class name {label!r}")
        if not isinstance(descs, list) or not descs:
            raise IngestionError(f"class {label!r} must map to a nonempty array of descriptions")
        kept = descs if truncate_m is None else descs[:truncate_m]
        classes.append(DescriptionSet(label=label, descriptions=tuple(kept)))
    return LabelCatalog(classes=classes, template=template)
