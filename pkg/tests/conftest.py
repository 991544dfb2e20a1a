import pytest

from research_space.corpus import (
    EntityKind,
    FieldTaxonomy,
    Intermediate,
    ResolvedCorpus,
    MatchStats,
    ResolvedRecord,
    TaxonomyField,
)


def make_taxonomy(n_fields=6, fields_per_intermediate=3):
    """Small synthetic 3-level taxonomy: F001.., I1.., two macro areas."""
    fields = []
    intermediates = {}
    n_inter = (n_fields + fields_per_intermediate - 1) // fields_per_intermediate
    for k in range(n_inter):
        iid = f"I{k + 1}"
        mid = "M1" if k < (n_inter + 1) // 2 else "M2"
        intermediates[iid] = Intermediate(iid, f"IN{k + 1}", mid)
    for i in range(n_fields):
        iid = f"I{i // fields_per_intermediate + 1}"
        fields.append(
            TaxonomyField(f"F{i + 1:03d}", f"Field {i + 1}", iid,
                          intermediates[iid].macro_id)
        )
    macros = {"M1": "Macro One", "M2": "Macro Two"}
    return FieldTaxonomy(fields, intermediates, macros)


def make_corpus(rows, kind=EntityKind.SCIENTIST):
    """rows: (entity_id, field_ids, n_authors, year) tuples."""
    records = [
        ResolvedRecord(entity_id=e, field_ids=tuple(f), n_authors=n, year=y)
        for e, f, n, y in rows
    ]
    return ResolvedCorpus(records=records, kind=kind, match_stats=MatchStats())


@pytest.fixture
def taxonomy6():
    return make_taxonomy(6)


@pytest.fixture
def taxonomy12():
    return make_taxonomy(12, fields_per_intermediate=4)
