"""
DAO-style ontology store.

The ontology file is a line-delimited projection of the Drug Abuse Ontology:

    C<TAB>id<TAB>kind<TAB>canonical<TAB>parent1,parent2   concept (parents may be '-')
    L<TAB>surface<TAB>concept_id<TAB>term_kind            lexicon entry
    R<TAB>DrugCategory<TAB>concept_id                     category root
    # ...                                                 comment

Surface forms resolve to concepts; concepts resolve to one of the eight drug
categories by walking the is-a graph up to a category root.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import OntologyError
from .labels import (
    DRUG_KINDS,
    UNCATEGORIZED,
    UNK_MASK_TOKEN,
    ConceptKind,
    DrugCategory,
    TermKind,
)
from .serializers import (
    CategoryRootRecordSerializer,
    ConceptRecordSerializer,
    LexiconRecordSerializer,
    first_error,
)
from .text_utils import is_mask_token, normalize_term, spans, term_key, token_key

logger = logging.getLogger(__name__)

CategoryResult = Union[DrugCategory, str]


@dataclass(frozen=True)
class Concept:
    id: str
    kind: ConceptKind
    canonical_name: str
    parents: Tuple[str, ...] = ()


@dataclass(frozen=True)
class LexiconEntry:
    surface_form: str
    concept_id: str
    term_kind: TermKind

    @property
    def key(self) -> str:
        return term_key(self.surface_form)


@dataclass(frozen=True)
class OntologyMetrics:
    concepts: int
    lexicon_entries: int
    relations: int
    uncategorized: int


@dataclass(frozen=True)
class EntityMatch:
    """A gazetteer hit: character span in the scanned text plus the resolved concept."""
    start: int
    end: int
    surface: str
    concept_id: str


@dataclass(frozen=True)
class Ontology:
    concepts: Mapping[str, Concept] = field(default_factory=dict)
    lexicon: Mapping[str, LexiconEntry] = field(default_factory=dict)
    category_roots: Mapping[DrugCategory, str] = field(default_factory=dict)

    @cached_property
    def _root_categories(self) -> Dict[str, DrugCategory]:
        return {concept_id: category for category, concept_id in self.category_roots.items()}

    @cached_property
    def _category_cache(self) -> Dict[str, CategoryResult]:
        return {}

    def ancestors(self, concept_id: str) -> List[str]:
        """Concept itself plus every concept reachable through parents, breadth-first."""
        seen = [concept_id]
        seen_set = {concept_id}
        frontier = [concept_id]
        while frontier:
            nxt = []
            for cid in frontier:
                for parent in self.concepts[cid].parents:
                    if parent not in seen_set:
                        seen_set.add(parent)
                        seen.append(parent)
                        nxt.append(parent)
            frontier = nxt
        return seen

    def reaches(self, concept_id: str, ancestor_id: str) -> bool:
        return ancestor_id in self.ancestors(concept_id)

    def category_of(self, concept_id: str) -> CategoryResult:
        cached = self._category_cache.get(concept_id)
        if cached is not None:
            return cached
        roots = self._root_categories
        found = sorted({roots[c] for c in self.ancestors(concept_id) if c in roots}, key=lambda c: c.value)
        if len(found) > 1:
            raise OntologyError(
                f"concept '{concept_id}' reaches several category roots: "
                f"{', '.join(c.value for c in found)}",
                offending=concept_id,
            )
        result = found[0] if found else UNCATEGORIZED
        self._category_cache[concept_id] = result
        return result

    def class_parent(self, concept_id: str) -> Optional[Concept]:
        """First direct parent that is a substance class."""
        for parent_id in self.concepts[concept_id].parents:
            parent = self.concepts[parent_id]
            if parent.kind == ConceptKind.SUBSTANCE_CLASS:
                return parent
        return None

    @cached_property
    def drug_gazetteer(self) -> Dict[Tuple[str, ...], str]:
        table = {}
        for key, entry in self.lexicon.items():
            if self.concepts[entry.concept_id].kind in DRUG_KINDS:
                table[tuple(key.split(' '))] = entry.concept_id
        return table

    @cached_property
    def max_term_tokens(self) -> int:
        return max((len(k) for k in self.drug_gazetteer), default=0)

    def unit_concept(self, token: str) -> Optional[Concept]:
        entry = self.lexicon.get(term_key(token))
        if entry is None:
            return None
        concept = self.concepts[entry.concept_id]
        return concept if concept.kind == ConceptKind.DOSAGE_UNIT else None


def _split_record(raw: str) -> List[str]:
    return [part.strip() for part in raw.rstrip('\r\n').split('\t')]


def _validated(serializer_cls, data: dict, line_no: int) -> dict:
    serializer = serializer_cls(data=data)
    if not serializer.is_valid():
        raise OntologyError(first_error(serializer.errors), line=line_no)
    return serializer.validated_data


def _find_cycle(concepts: Mapping[str, Concept]) -> Optional[List[str]]:
    white, grey, black = 0, 1, 2
    color = {cid: white for cid in concepts}
    for start in concepts:
        if color[start] != white:
            continue
        stack = [(start, iter(concepts[start].parents))]
        path = [start]
        color[start] = grey
        while stack:
            node, parents = stack[-1]
            advanced = False
            for parent in parents:
                if color[parent] == grey:
                    return path[path.index(parent):] + [parent]
                if color[parent] == white:
                    color[parent] = grey
                    stack.append((parent, iter(concepts[parent].parents)))
                    path.append(parent)
                    advanced = True
                    break
            if not advanced:
                color[node] = black
                stack.pop()
                path.pop()
    return None


def parse_ontology(lines: Iterable[str]) -> Ontology:
    concepts: Dict[str, Concept] = {}
    concept_lines: Dict[str, int] = {}
    lexicon: Dict[str, LexiconEntry] = {}
    lexicon_lines: Dict[str, int] = {}
    roots: Dict[DrugCategory, str] = {}
    root_lines: Dict[DrugCategory, int] = {}

    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.lstrip().startswith('#'):
            continue
        parts = _split_record(raw)
        tag = parts[0]
        if tag == 'C':
            if len(parts) not in (4, 5):
                raise OntologyError('concept record needs 4 or 5 tab-separated fields', line=line_no)
            data = _validated(ConceptRecordSerializer, {
                'id': parts[1], 'kind': parts[2], 'canonical': parts[3],
                'parents': parts[4] if len(parts) == 5 else '',
            }, line_no)
            if data['id'] in concepts:
                raise OntologyError(f"duplicate concept id '{data['id']}'", line=line_no, offending=data['id'])
            concepts[data['id']] = Concept(
                id=data['id'],
                kind=ConceptKind(data['kind']),
                canonical_name=data['canonical'],
                parents=tuple(data['parents']),
            )
            concept_lines[data['id']] = line_no
        elif tag == 'L':
            if len(parts) != 4:
                raise OntologyError('lexicon record needs 4 tab-separated fields', line=line_no)
            data = _validated(LexiconRecordSerializer, {
                'surface': parts[1], 'concept_id': parts[2], 'term_kind': parts[3],
            }, line_no)
            surface = normalize_term(data['surface'])
            key = term_key(surface)
            if not key:
                raise OntologyError(f"empty surface form '{data['surface']}'", line=line_no)
            if key in lexicon:
                raise OntologyError(
                    f"duplicate surface form '{surface}' (first on line {lexicon_lines[key]})",
                    line=line_no,
                    offending=surface,
                )
            lexicon[key] = LexiconEntry(surface, data['concept_id'], TermKind(data['term_kind']))
            lexicon_lines[key] = line_no
        elif tag == 'R':
            if len(parts) != 3:
                raise OntologyError('category root record needs 3 tab-separated fields', line=line_no)
            data = _validated(CategoryRootRecordSerializer, {
                'category': parts[1], 'concept_id': parts[2],
            }, line_no)
            category = DrugCategory(data['category'])
            if category in roots:
                raise OntologyError(f"duplicate category root for {category.value}", line=line_no,
                                    offending=category.value)
            roots[category] = data['concept_id']
            root_lines[category] = line_no
        else:
            raise OntologyError(f"unknown record type '{tag}' (expected C, L or R)", line=line_no)

    for cid, concept in concepts.items():
        for parent in concept.parents:
            if parent not in concepts:
                raise OntologyError(
                    f"dangling parent id '{parent}' on concept '{cid}'",
                    line=concept_lines[cid],
                    offending=parent,
                )
    for key, entry in lexicon.items():
        if entry.concept_id not in concepts:
            raise OntologyError(
                f"lexicon entry '{entry.surface_form}' points to unknown concept '{entry.concept_id}'",
                line=lexicon_lines[key],
                offending=entry.concept_id,
            )
    for category, cid in roots.items():
        if cid not in concepts:
            raise OntologyError(
                f"category root {category.value} points to unknown concept '{cid}'",
                line=root_lines[category],
                offending=cid,
            )

    cycle = _find_cycle(concepts)
    if cycle:
        raise OntologyError(
            f"cycle in is-a graph: {' -> '.join(cycle)}",
            line=concept_lines[cycle[0]],
            offending=','.join(cycle[:-1]),
        )

    ontology = Ontology(concepts=concepts, lexicon=lexicon, category_roots=roots)
    for cid, concept in concepts.items():
        if concept.kind == ConceptKind.SUBSTANCE:
            try:
                ontology.category_of(cid)
            except OntologyError as exc:
                raise OntologyError(str(exc), line=concept_lines[cid], offending=cid) from exc
    return ontology


def load_ontology(path) -> Ontology:
    path = Path(path)
    with path.open(encoding='utf-8') as handle:
        ontology = parse_ontology(handle)
    logger.info(
        'loaded ontology %s: %d concepts, %d lexicon entries',
        path, len(ontology.concepts), len(ontology.lexicon),
    )
    return ontology


def dump_ontology(ontology: Ontology, path) -> None:
    lines = ['# sudwatch ontology projection']
    for concept in ontology.concepts.values():
        parents = ','.join(concept.parents) if concept.parents else '-'
        lines.append(f'C\t{concept.id}\t{concept.kind.value}\t{concept.canonical_name}\t{parents}')
    for category, cid in ontology.category_roots.items():
        lines.append(f'R\t{category.value}\t{cid}')
    for entry in ontology.lexicon.values():
        lines.append(f'L\t{entry.surface_form}\t{entry.concept_id}\t{entry.term_kind.value}')
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def resolve_term(ontology: Ontology, term: str) -> Optional[Concept]:
    entry = ontology.lexicon.get(term_key(term))
    if entry is None:
        return None
    return ontology.concepts[entry.concept_id]


def super_category(ontology: Ontology, concept: Concept) -> CategoryResult:
    """The unique DrugCategory reached from concept, or UNCATEGORIZED."""
    return ontology.category_of(concept.id)


def export_lexicon(ontology: Ontology, categories: Iterable[DrugCategory]) -> List[str]:
    wanted = set(categories)
    if not wanted:
        return []
    forms = {
        entry.surface_form
        for entry in ontology.lexicon.values()
        if ontology.category_of(entry.concept_id) in wanted
    }
    return sorted(forms)


def ontology_metrics(ontology: Ontology) -> OntologyMetrics:
    uncategorized = sum(
        1 for cid, concept in ontology.concepts.items()
        if concept.kind == ConceptKind.SUBSTANCE and ontology.category_of(cid) == UNCATEGORIZED
    )
    return OntologyMetrics(
        concepts=len(ontology.concepts),
        lexicon_entries=len(ontology.lexicon),
        relations=sum(len(c.parents) for c in ontology.concepts.values()),
        uncategorized=uncategorized,
    )


def find_drug_mentions(ontology: Ontology, text: str) -> List[EntityMatch]:
    """Longest-match-wins, left-to-right gazetteer scan over word tokens.

    Multi-word terms only match when their tokens are separated by whitespace.
    Mask tokens never match.
    """
    gazetteer = ontology.drug_gazetteer
    max_len = ontology.max_term_tokens
    if not text or not gazetteer:
        return []
    toks = spans(text)
    keys = [None if is_mask_token(t.text) else token_key(t.text) for t in toks]
    matches = []
    i = 0
    while i < len(toks):
        if keys[i] is None:
            i += 1
            continue
        hit = None
        for length in range(min(max_len, len(toks) - i), 0, -1):
            window = keys[i:i + length]
            if None in window:
                continue
            if any(not text[toks[j].end:toks[j + 1].start].isspace() for j in range(i, i + length - 1)):
                continue
            concept_id = gazetteer.get(tuple(window))
            if concept_id is not None:
                hit = (length, concept_id)
                break
        if hit is None:
            i += 1
            continue
        length, concept_id = hit
        start, end = toks[i].start, toks[i + length - 1].end
        matches.append(EntityMatch(start, end, text[start:end], concept_id))
        i += length
    return matches


def mention_categories(ontology: Ontology, matches: Sequence[EntityMatch]) -> FrozenSet[DrugCategory]:
    found = set()
    for match in matches:
        category = ontology.category_of(match.concept_id)
        if category != UNCATEGORIZED:
            found.add(category)
    return frozenset(found)


def mask_token_for(ontology: Ontology, concept_id: str) -> str:
    category = ontology.category_of(concept_id)
    if category == UNCATEGORIZED:
        return UNK_MASK_TOKEN
    return category.mask_token
