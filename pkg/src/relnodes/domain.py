"""Variable domains and index-set helpers."""

from __future__ import annotations

from typing import Iterable, Sequence, Union

VarRef = Union[int, str]


class Domain:
    """An ordered universe of named variables.

    Variables are referred to either by name or by their dense index
    ``0..len(domain)-1``.  All variable sets handed around the package are
    sorted tuples of indices over a single domain.
    """

    __slots__ = ("names", "_lookup")

    def __init__(self, names: Iterable[str]):
        names = tuple(str(n) for n in names)
        if not names:
            raise ValueError("a domain needs at least one variable")
        lookup = {}
        for i, name in enumerate(names):
            if name in lookup:
                raise ValueError(f"duplicate variable name {name!r}")
            lookup[name] = i
        self.names = names
        self._lookup = lookup

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Domain({list(self.names)!r})"

    def index(self, ref: VarRef) -> int:
        if isinstance(ref, str):
            try:
                return self._lookup[ref]
            except KeyError:
                raise UnknownVariableError([ref]) from None
        i = int(ref)
        if not 0 <= i < len(self.names):
            raise UnknownVariableError([ref])
        return i

    def varset(self, refs: VarRef | Iterable[VarRef] | None) -> tuple[int, ...]:
        """Resolve a name, an index or an iterable of either to a sorted index tuple."""
        if refs is None:
            return ()
        if isinstance(refs, (str, int)):
            refs = [refs]
        refs = list(refs)
        unknown = []
        out = set()
        for r in refs:
            try:
                out.add(self.index(r))
            except UnknownVariableError:
                unknown.append(r)
        if unknown:
            raise UnknownVariableError(unknown)
        return tuple(sorted(out))

    def names_of(self, idx: Iterable[int]) -> list[str]:
        return [self.names[i] for i in idx]

    def subdomain(self, idx: Sequence[int]) -> "Domain":
        return Domain(self.names[i] for i in idx)


class UnknownVariableError(KeyError):
    """Raised when a variable name or index does not belong to a domain."""

    def __init__(self, refs):
        self.refs = list(refs)
        super().__init__(f"unknown variable(s): {', '.join(map(str, self.refs))}")

    def __str__(self) -> str:
        return self.args[0]


def as_varset(x: int | Iterable[int]) -> tuple[int, ...]:
    if isinstance(x, (int,)) or hasattr(x, "__index__"):
        return (int(x),)
    return tuple(sorted({int(i) for i in x}))


def check_disjoint(*sets: Sequence[int]) -> None:
    seen: set[int] = set()
    for s in sets:
        overlap = seen.intersection(s)
        if overlap:
            raise ValueError(f"variable sets overlap on {sorted(overlap)}")
        seen.update(s)
