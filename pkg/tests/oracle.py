"""Independent brute-force reference implementations.

Everything here recomputes results from first principles (regex scans,
pairwise closures, explicit per-token loops) so the package can be checked
against code that shares none of its internals.
"""

from __future__ import annotations

import re
from collections import Counter

_TOKEN_RE = re.compile(r"[^\W_]+|\S")

SEVERITY = {"NO_MASK": 0, "QUASI": 1, "DIRECT": 2}


def oracle_tokenize(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def oracle_span_tokens(text: str, start: int, end: int) -> set[int]:
    chars = set(range(start, end))
    out = set()
    for i, (t_start, t_end) in enumerate(oracle_tokenize(text)):
        if chars & set(range(t_start, t_end)):
            out.add(i)
    return out


def oracle_groups(mentions, relations) -> list[list]:
    """Connected components over the pairwise linking relation."""
    n = len(mentions)
    linked = [[False] * n for _ in range(n)]
    rel_set = {frozenset(pair) for pair in relations}
    ids = {m.mention_id: i for i, m in enumerate(mentions)}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = mentions[i], mentions[j]
            if " ".join(a.span_text.split()) == " ".join(b.span_text.split()):
                linked[i][j] = True
            if a.entity_id and a.entity_id == b.entity_id:
                linked[i][j] = True
            if frozenset((a.mention_id, b.mention_id)) in rel_set:
                linked[i][j] = True
    # transitive closure
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if linked[i][j]:
                    for k in range(n):
                        if linked[j][k] and not linked[i][k]:
                            linked[i][k] = True
                            changed = True
    seen = set()
    groups = []
    for i in range(n):
        if i in seen:
            continue
        component = [i] + [j for j in range(n) if j != i and linked[i][j]]
        seen.update(component)
        groups.append([mentions[j] for j in sorted(component)])
    _ = ids
    return groups


def _entity_views(doc):
    """Per annotator: list of (identifier_class, token_set) entity views."""
    views = {}
    for annotator in sorted(doc.annotations):
        ann = doc.annotations[annotator]
        entities = []
        for group in oracle_groups(list(ann.mentions), list(ann.relations)):
            tokens = set()
            for m in group:
                tokens |= oracle_span_tokens(doc.text, m.start_offset, m.end_offset)
            severity = max(SEVERITY.get(m.identifier_type, -1) for m in group)
            label = {0: "NO_MASK", 1: "QUASI", 2: "DIRECT"}.get(severity, "NO_MASK")
            entities.append((label, tokens))
        views[annotator] = entities
    return views


def oracle_metrics(corpus, masks, ic_weight=None):
    """All five metrics computed with plain nested loops.

    ic_weight(doc, token_index) defaults to the constant 1.0. Returns a dict
    with integer (numerator, denominator) pairs for the count metrics and
    float pairs for the weighted precision.
    """
    if ic_weight is None:
        ic_weight = lambda doc, i: 1.0

    er_num = {"DIRECT": 0, "QUASI": 0}
    er_den = {"DIRECT": 0, "QUASI": 0}
    r_num = r_den = 0
    p_num = p_den = 0
    wp_num = 0.0
    wp_den = 0.0

    for doc in corpus.documents:
        if not doc.annotations:
            continue
        mask = sorted(masks[doc.doc_id].masked_tokens)
        mask_set = set(mask)
        views = _entity_views(doc)
        annotators = sorted(views)

        for annotator in annotators:
            covered = set()
            for label, tokens in views[annotator]:
                if label in ("DIRECT", "QUASI"):
                    er_den[label] += 1
                    if tokens.issubset(mask_set):
                        er_num[label] += 1
                    covered |= tokens
            r_num += len(covered & mask_set)
            r_den += len(covered)
            p_num += len(mask_set & covered)
            for index in mask:
                if index in covered:
                    wp_num += ic_weight(doc, index)
        p_den += len(annotators) * len(mask_set)
        for index in mask:
            wp_den += len(annotators) * ic_weight(doc, index)

    return {
        "er_di": (er_num["DIRECT"], er_den["DIRECT"]),
        "er_qi": (er_num["QUASI"], er_den["QUASI"]),
        "r": (r_num, r_den),
        "p": (p_num, p_den),
        "wp": (wp_num, wp_den),
    }


def oracle_false_negatives(corpus, masks):
    """(per entity type, per identifier class) false-negative recount."""
    by_type = Counter()
    totals_by_type = Counter()
    by_class = Counter()
    totals_by_class = Counter()
    for doc in corpus.documents:
        if not doc.annotations:
            continue
        mask_set = set(masks[doc.doc_id].masked_tokens)
        for annotator in sorted(doc.annotations):
            ann = doc.annotations[annotator]
            for group in oracle_groups(list(ann.mentions), list(ann.relations)):
                severity = max(SEVERITY.get(m.identifier_type, -1) for m in group)
                label = {1: "QUASI", 2: "DIRECT"}.get(severity)
                if label is None:
                    continue
                types = Counter(m.entity_type for m in group)
                best = max(types.values())
                from maskeval.model import ENTITY_TYPES
                entity_type = next(t for t in ENTITY_TYPES if types.get(t) == best)
                tokens = set()
                for m in group:
                    tokens |= oracle_span_tokens(doc.text, m.start_offset, m.end_offset)
                totals_by_type[entity_type] += 1
                totals_by_class[label] += 1
                if not tokens.issubset(mask_set):
                    by_type[entity_type] += 1
                    by_class[label] += 1
    return by_type, totals_by_type, by_class, totals_by_class


def oracle_alpha_nominal(units: list[list[str]]) -> float | None:
    """Krippendorff's alpha from an explicit coincidence matrix."""
    pairable = [values for values in units if len(values) >= 2]
    n = sum(len(values) for values in pairable)
    if n < 2:
        return None
    categories = sorted({v for values in pairable for v in values})
    index = {c: k for k, c in enumerate(categories)}
    size = len(categories)
    coincidence = [[0.0] * size for _ in range(size)]
    for values in pairable:
        m_u = len(values)
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if i != j:
                    coincidence[index[a]][index[b]] += 1.0 / (m_u - 1)
    totals = [sum(row) for row in coincidence]
    grand = sum(totals)
    d_o = sum(coincidence[i][j] for i in range(size) for j in range(size) if i != j)
    d_e = sum(totals[i] * totals[j] for i in range(size) for j in range(size) if i != j)
    d_e /= (grand - 1)
    if d_e == 0:
        return None
    return 1.0 - d_o / d_e


def oracle_fleiss_fixed(label_lists: list[list[str]]) -> float | None:
    """Classic fixed-rater-count formula from the item-by-category matrix."""
    n_raters = len(label_lists[0])
    assert all(len(labels) == n_raters for labels in label_lists)
    categories = sorted({label for labels in label_lists for label in labels})
    if len(categories) < 2:
        return None
    matrix = [[labels.count(c) for c in categories] for labels in label_lists]
    n_items = len(matrix)
    p_i = [(sum(v * v for v in row) - n_raters) / (n_raters * (n_raters - 1))
           for row in matrix]
    p_bar = sum(p_i) / n_items
    p_j = [sum(row[k] for row in matrix) / (n_items * n_raters)
           for k in range(len(categories))]
    p_e = sum(p * p for p in p_j)
    return (p_bar - p_e) / (1 - p_e)
