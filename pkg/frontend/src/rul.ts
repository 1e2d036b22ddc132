import type { AnchorData, RulDocument, RulingData, Vec3 } from './types.js';

/** Reader/writer for `.rul` ruling documents, matching the core file schema. */

function isVec3(value: unknown): value is Vec3 {
  return Array.isArray(value) && value.length === 3
    && value.every((v) => typeof v === 'number' && Number.isFinite(v));
}

export function writeRul(rulings: RulingData[], unit = 'unitless',
                         anchors?: AnchorData[]): string {
  const doc: RulDocument = { format: 'rul', version: 1, unit, rulings };
  if (anchors && anchors.length > 0) doc.anchors = anchors;
  return `${JSON.stringify(doc, null, 2)}\n`;
}

export function parseRul(text: string): RulDocument {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`invalid .rul document: ${(err as Error).message}`);
  }
  const doc = raw as Partial<RulDocument>;
  if (doc.format !== 'rul' || doc.version !== 1) {
    throw new Error(`unsupported document header: ${doc.format}/${doc.version}`);
  }
  if (!Array.isArray(doc.rulings) || doc.rulings.length < 2) {
    throw new Error('a .rul document needs at least two rulings');
  }
  doc.rulings.forEach((r, i) => {
    if (!isVec3(r?.q) || !isVec3(r?.p)) {
      throw new Error(`ruling ${i} is malformed`);
    }
  });
  if (doc.anchors !== undefined) {
    doc.anchors.forEach((w, i) => {
      if (!isVec3(w?.a) || !isVec3(w?.b)) throw new Error(`anchor ${i} is malformed`);
    });
  }
  return {
    format: 'rul',
    version: 1,
    unit: typeof doc.unit === 'string' ? doc.unit : 'unitless',
    rulings: doc.rulings,
    anchors: doc.anchors,
  };
}
