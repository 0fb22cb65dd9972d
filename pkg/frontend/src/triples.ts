/** Just enough N-Triples parsing to turn server rows into renderable terms. */

export interface TermView {
  kind: "iri" | "blank" | "literal";
  value: string;
}

export interface TripleParts {
  subject: TermView;
  predicate: string;
  object: TermView;
}

const RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

function readIri(line: string, at: number): [string, number] {
  const end = line.indexOf(">", at);
  if (line[at] !== "<" || end < 0) throw new Error(`expected <iri> at ${at}: ${line}`);
  return [line.slice(at + 1, end), end + 1];
}

function readTerm(line: string, at: number): [TermView, number] {
  if (line[at] === "<") {
    const [iri, next] = readIri(line, at);
    return [{ kind: "iri", value: iri }, next];
  }
  if (line.startsWith("_:", at)) {
    let end = at + 2;
    while (end < line.length && !" \t".includes(line[end])) end += 1;
    return [{ kind: "blank", value: line.slice(at, end) }, end];
  }
  if (line[at] === '"') {
    let end = at + 1;
    let lexical = "";
    while (end < line.length && line[end] !== '"') {
      if (line[end] === "\\" && end + 1 < line.length) {
        const escaped = line[end + 1];
        lexical += escaped === "n" ? "\n" : escaped === "t" ? "\t" : escaped;
        end += 2;
      } else {
        lexical += line[end];
        end += 1;
      }
    }
    if (line[end] !== '"') throw new Error(`unterminated literal: ${line}`);
    end += 1;
    // Datatype and language tags only decorate; the lexical form is the view.
    if (line.startsWith("^^<", end)) end = line.indexOf(">", end) + 1;
    else if (line[end] === "@") while (end < line.length && !" \t".includes(line[end])) end += 1;
    return [{ kind: "literal", value: lexical }, end];
  }
  throw new Error(`unreadable term at ${at}: ${line}`);
}

function skipSpace(line: string, at: number): number {
  while (at < line.length && " \t".includes(line[at])) at += 1;
  return at;
}

/** Parse one "<s> <p> <o> ." line as served in triple views. */
export function parseTripleLine(line: string): TripleParts {
  let at = skipSpace(line, 0);
  const [subject, afterSubject] = readTerm(line, at);
  at = skipSpace(line, afterSubject);
  const [predicate, afterPredicate] = readIri(line, at);
  at = skipSpace(line, afterPredicate);
  const [object] = readTerm(line, at);
  return { subject, predicate, object };
}

/** Human-readable tail of an IRI, for node and edge labels. */
export function localName(iri: string): string {
  const cut = Math.max(iri.lastIndexOf("#"), iri.lastIndexOf("/"));
  const tail = cut >= 0 ? iri.slice(cut + 1) : iri;
  return tail || iri;
}

export function isTypeAssertion(parts: TripleParts): boolean {
  return parts.predicate === RDF_TYPE && parts.object.kind === "iri";
}
