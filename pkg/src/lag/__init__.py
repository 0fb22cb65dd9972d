"""Knowledge-graph extension toolkit: extract an entity graph from case text,
let a generative provider propose tacit-knowledge triples, constrain them to
an ontology's logical and factual boundaries, reconcile entities against a
reference knowledge base, and aggregate reviewed expert contributions into a
provenance-tracked extended graph.
"""

__version__ = "0.1.0"
