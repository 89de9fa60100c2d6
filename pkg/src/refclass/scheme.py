"""Category taxonomy and fractional journal-to-category vectors.

The taxonomy mirrors journal-level subject schemes such as Scopus ASJC:
leaf categories grouped into areas, one catch-all ("miscellaneous")
category inside each regular area, and a single catch-all area whose
assignments carry no disciplinary signal.  Classification *targets* are
the non-misc categories of the regular areas.  Weight landing on a
miscellaneous category is spread equally over its area's targets; weight
landing on any category of the catch-all area is spread equally over
every target.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

CategoryVector = dict[int, float]
"""Sparse category-code -> weight mapping; absent codes carry weight 0."""

_SCHEME_HEADER = ["code", "name", "area_code", "is_misc", "is_multidisciplinary-area"]


class SchemeError(ValueError):
    """Malformed scheme file or taxonomy invariant violation."""


@dataclass(frozen=True)
class Category:
    code: int
    name: str
    area_code: int
    is_misc: bool


@dataclass(frozen=True)
class Area:
    area_code: int
    name: str
    is_multidisciplinary: bool


class CategoryScheme:
    """Immutable taxonomy with precomputed lookup tables.

    Exposes, besides the raw ``categories`` and ``areas`` tuples:

    - ``targets``: sorted tuple of classification target codes,
    - ``target_index``: code -> dense column index (0..len(targets)-1),
    - ``area_targets``: area_code -> sorted tuple of that area's targets
      (empty for the catch-all area),
    - ``multidisciplinary_area``: code of the single catch-all area.

    Instances are read-only after construction and safe to share across
    threads.
    """

    def __init__(self, categories: Sequence[Category], areas: Sequence[Area]):
        self.categories: tuple[Category, ...] = tuple(categories)
        self.areas: tuple[Area, ...] = tuple(areas)

        self.category_by_code: dict[int, Category] = {}
        for cat in self.categories:
            if cat.code in self.category_by_code:
                raise SchemeError(f"duplicate category code {cat.code}")
            self.category_by_code[cat.code] = cat

        self.area_by_code: dict[int, Area] = {}
        for area in self.areas:
            if area.area_code in self.area_by_code:
                raise SchemeError(f"duplicate area code {area.area_code}")
            self.area_by_code[area.area_code] = area

        multi = [a.area_code for a in self.areas if a.is_multidisciplinary]
        if len(multi) != 1:
            raise SchemeError(
                f"expected exactly one multidisciplinary area, found {len(multi)}"
            )
        self.multidisciplinary_area: int = multi[0]

        for cat in self.categories:
            if cat.area_code not in self.area_by_code:
                raise SchemeError(
                    f"category {cat.code} references unknown area {cat.area_code}"
                )

        self.targets: tuple[int, ...] = tuple(
            sorted(
                c.code
                for c in self.categories
                if not c.is_misc and c.area_code != self.multidisciplinary_area
            )
        )
        if not self.targets:
            raise SchemeError("scheme has no classification targets")
        self.target_index: dict[int, int] = {c: i for i, c in enumerate(self.targets)}

        self.area_targets: dict[int, tuple[int, ...]] = {
            a.area_code: () for a in self.areas
        }
        grouped: dict[int, list[int]] = {}
        for code in self.targets:
            grouped.setdefault(self.category_by_code[code].area_code, []).append(code)
        for area_code, codes in grouped.items():
            self.area_targets[area_code] = tuple(sorted(codes))

        for area in self.areas:
            if area.is_multidisciplinary:
                continue
            if not self.area_targets[area.area_code]:
                raise SchemeError(
                    f"area {area.area_code} has no non-miscellaneous categories"
                )

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def n_areas(self) -> int:
        return len(self.areas)

    def is_target(self, code: int) -> bool:
        return code in self.target_index

    def area_of(self, code: int) -> int:
        """Area code of a category code."""
        return self.category_by_code[code].area_code

    def _canonical(self) -> tuple:
        # category order carries no meaning and area names are derived
        # labels, so equality ignores both
        return (
            tuple(sorted(self.categories, key=lambda c: c.code)),
            tuple(
                (a.area_code, a.is_multidisciplinary)
                for a in sorted(self.areas, key=lambda a: a.area_code)
            ),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CategoryScheme):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self) -> int:
        return hash(self._canonical())

    def __repr__(self) -> str:
        return (
            f"CategoryScheme({len(self.categories)} categories, "
            f"{len(self.areas)} areas, {len(self.targets)} targets)"
        )


def _parse_bool(text: str, path: str, line: int, column: str) -> bool:
    if text == "0":
        return False
    if text == "1":
        return True
    raise SchemeError(f"{path}:{line}: column {column!r} must be 0 or 1, got {text!r}")


def load_scheme(path: str) -> CategoryScheme:
    """Parse a category scheme CSV.

    Expected header: ``code,name,area_code,is_misc,is_multidisciplinary-area``
    with one row per category; booleans are 0/1.  Area rows are inferred:
    an area's name is taken from the category whose code equals the area
    code (the usual layout for misc categories), otherwise synthesized.
    """
    categories: list[Category] = []
    area_flags: dict[int, bool] = {}
    flag_origin: dict[int, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SCHEME_HEADER:
            raise SchemeError(
                f"{path}:1: expected header {','.join(_SCHEME_HEADER)!r}, "
                f"got {header!r}"
            )
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise SchemeError(f"{path}:{line}: expected 5 columns, got {len(row)}")
            try:
                code = int(row[0])
                area_code = int(row[2])
            except ValueError as exc:
                raise SchemeError(f"{path}:{line}: {exc}") from None
            is_misc = _parse_bool(row[3], path, line, "is_misc")
            is_multi = _parse_bool(row[4], path, line, "is_multidisciplinary-area")
            if area_code in area_flags and area_flags[area_code] != is_multi:
                raise SchemeError(
                    f"{path}:{line}: area {area_code} flagged multidisciplinary="
                    f"{int(is_multi)} but line {flag_origin[area_code]} said "
                    f"{int(area_flags[area_code])}"
                )
            area_flags.setdefault(area_code, is_multi)
            flag_origin.setdefault(area_code, line)
            categories.append(Category(code, row[1], area_code, is_misc))

    names = {c.code: c.name for c in categories}
    areas = [
        Area(code, names.get(code, f"area {code}"), is_multi)
        for code, is_multi in sorted(area_flags.items())
    ]
    try:
        return CategoryScheme(categories, areas)
    except SchemeError as exc:
        raise SchemeError(f"{path}: {exc}") from None


def write_scheme(scheme: CategoryScheme, path: str) -> None:
    """Emit a scheme CSV readable by :func:`load_scheme`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SCHEME_HEADER)
        for cat in sorted(scheme.categories, key=lambda c: c.code):
            multi = scheme.area_by_code[cat.area_code].is_multidisciplinary
            writer.writerow(
                [cat.code, cat.name, cat.area_code, int(cat.is_misc), int(multi)]
            )


def fractionalize_journal(
    assigned_codes: Iterable[int], scheme: CategoryScheme
) -> CategoryVector:
    """Fractional target vector of a journal's category assignment set.

    Assignments are unweighted set semantics: k distinct codes each get
    1/k.  A code's share then lands on the code itself (target), spreads
    over its area's targets (misc), or spreads over all targets (any
    catch-all-area code).  The result sums to 1 and contains only target
    codes.
    """
    codes = sorted(set(assigned_codes))
    if not codes:
        raise SchemeError("cannot fractionalize an empty assignment set")
    share = 1.0 / len(codes)
    out: CategoryVector = {}
    for code in codes:
        cat = scheme.category_by_code.get(code)
        if cat is None:
            raise SchemeError(f"unknown category code {code}")
        if cat.area_code == scheme.multidisciplinary_area:
            part = share / len(scheme.targets)
            for t in scheme.targets:
                out[t] = out.get(t, 0.0) + part
        elif cat.is_misc:
            siblings = scheme.area_targets[cat.area_code]
            part = share / len(siblings)
            for t in siblings:
                out[t] = out.get(t, 0.0) + part
        else:
            out[code] = out.get(code, 0.0) + share
    return dict(sorted(out.items()))
