"""Well-known vocabulary IRIs plus the namespaces used by the bundled fixtures."""

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"


class RDF:
    type = RDF_NS + "type"
    langString = RDF_NS + "langString"


class RDFS:
    subClassOf = RDFS_NS + "subClassOf"
    subPropertyOf = RDFS_NS + "subPropertyOf"
    domain = RDFS_NS + "domain"
    range = RDFS_NS + "range"
    label = RDFS_NS + "label"


class OWL:
    Class = OWL_NS + "Class"
    ObjectProperty = OWL_NS + "ObjectProperty"
    DatatypeProperty = OWL_NS + "DatatypeProperty"
    AnnotationProperty = OWL_NS + "AnnotationProperty"
    disjointWith = OWL_NS + "disjointWith"
    equivalentClass = OWL_NS + "equivalentClass"
    equivalentProperty = OWL_NS + "equivalentProperty"
    sameAs = OWL_NS + "sameAs"


class XSD:
    string = XSD_NS + "string"
    integer = XSD_NS + "integer"
    decimal = XSD_NS + "decimal"
    boolean = XSD_NS + "boolean"
    date = XSD_NS + "date"


class SKOS:
    altLabel = SKOS_NS + "altLabel"


# Fixture ontology namespaces.
TOP_NS = "http://example.org/ontology/top#"
MDX_NS = "http://example.org/ontology/mdx#"
CAUS_NS = "http://example.org/ontology/caus#"
LAGV_NS = "http://example.org/ontology/lag#"
EX_NS = "http://example.org/case/"
WD_NS = "http://www.wikidata.org/entity/"
WDT_NS = "http://www.wikidata.org/prop/direct/"

# Annotation property a schema may attach to a predicate to classify the kind
# of tacit relation it expresses (e.g. "CausalConsequence").
TACIT_KIND = LAGV_NS + "tacitKind"

# Provenance partitions: named graphs separating who contributed what.
PARTITION_NS = "urn:lag:partition:"
AMODAL_PARTITION = "amodal"
GENERATED_PARTITION = "generated"
BASE_CONTEXT_PARTITION = "base-context"
DERIVED_PARTITION = "derived"


def partition_iri(name: str, base: str = PARTITION_NS) -> str:
    """Graph IRI for a partition name ('amodal', 'opinion:alice', ...)."""
    return base + name


def opinion_partition(expert_id: str) -> str:
    return f"opinion:{expert_id}"

FIXTURE_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "owl": OWL_NS,
    "xsd": XSD_NS,
    "skos": SKOS_NS,
    "top": TOP_NS,
    "mdx": MDX_NS,
    "caus": CAUS_NS,
    "lag": LAGV_NS,
    "ex": EX_NS,
    "wd": WD_NS,
    "wdt": WDT_NS,
}
