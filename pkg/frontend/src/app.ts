import { ApiClient, ApiError } from './api.js';
import { colorForBranch } from './colors.js';
import { computeSegments } from './highlight.js';
import {
  annotationsByType,
  beginRequest,
  cacheCard,
  effectiveConfig,
  initialState,
  receiveDocument,
  receiveError,
} from './state.js';
import { branchOf, nodeIndex, parentMap, toggleSelection } from './tree.js';
import type { ConceptCard, SemNode } from './types.js';

const BASE = (window as unknown as { TERMLINK_API?: string }).TERMLINK_API ?? 'http://127.0.0.1:8000';

const api = new ApiClient(BASE);
const state = initialState();
const root = document.getElementById('app')!;

let semnetParents = new Map<string, string | null>();
let semnetNames = new Map<string, SemNode>();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function typeName(tui: string): string {
  return semnetNames.get(tui)?.name ?? tui;
}

function typeColor(tui: string): string {
  return colorForBranch(branchOf(tui, semnetParents));
}

// ---------------------------------------------------------------- home page

function renderTree(container: HTMLElement, nodes: SemNode[]): void {
  const list = el('ul', 'tree');
  for (const node of nodes) {
    const item = el('li');
    const row = el('div', 'tree-row');

    const toggle = el('button', 'tree-toggle', node.children.length ? (state.expandedTuis.has(node.tui) ? '▾' : '▸') : '·');
    toggle.disabled = node.children.length === 0;
    toggle.addEventListener('click', () => {
      if (state.expandedTuis.has(node.tui)) state.expandedTuis.delete(node.tui);
      else state.expandedTuis.add(node.tui);
      render();
    });

    const checkbox = el('input') as HTMLInputElement;
    checkbox.type = 'checkbox';
    checkbox.checked = state.selectedTuis.has(node.tui);
    checkbox.addEventListener('change', () => {
      state.selectedTuis = toggleSelection(state.semnet!, state.selectedTuis, node.tui, checkbox.checked);
      render();
    });

    const label = el('label', 'tree-label');
    label.append(checkbox, el('span', 'tree-swatch'), ` ${node.name} (${node.tui})`);
    (label.querySelector('.tree-swatch') as HTMLElement).style.background = typeColor(node.tui);

    row.append(toggle, label);
    item.append(row);
    if (node.children.length && state.expandedTuis.has(node.tui)) {
      const childBox = el('div', 'tree-children');
      renderTree(childBox, node.children);
      item.append(childBox);
    }
    list.append(item);
  }
  container.append(list);
}

function configControls(): HTMLElement {
  const box = el('div', 'config');

  const select = (label: string, options: string[], value: string, onChange: (v: string) => void) => {
    const wrap = el('label', 'config-item', label + ' ');
    const sel = el('select') as HTMLSelectElement;
    for (const option of options) {
      const opt = el('option', undefined, option) as HTMLOptionElement;
      opt.value = option;
      sel.append(opt);
    }
    sel.value = value;
    sel.addEventListener('change', () => onChange(sel.value));
    wrap.append(sel);
    return wrap;
  };

  box.append(
    select('boundary', ['ngram', 'phrase'], state.config.boundary ?? 'ngram', (v) => {
      state.config.boundary = v as 'ngram' | 'phrase';
    }),
    select('reranker', ['L', 'A', 'C'], state.config.reranker ?? 'C', (v) => {
      state.config.reranker = v as 'L' | 'A' | 'C';
    }),
    select('wsd', ['ukb', 'rand'], state.config.wsd ?? 'ukb', (v) => {
      state.config.wsd = v as 'ukb' | 'rand';
    }),
  );

  const threshold = el('label', 'config-item', 'threshold ');
  const input = el('input') as HTMLInputElement;
  input.type = 'number';
  input.min = '0';
  input.max = '1';
  input.step = '0.05';
  input.placeholder = 'auto';
  if (state.config.threshold != null) input.value = String(state.config.threshold);
  input.addEventListener('change', () => {
    state.config.threshold = input.value === '' ? null : Number(input.value);
  });
  threshold.append(input);
  box.append(threshold);
  return box;
}

async function submit(): Promise<void> {
  const token = beginRequest(state);
  render();
  try {
    const doc = await api.annotate(state.text, effectiveConfig(state));
    if (receiveDocument(state, doc, token)) render();
  } catch (err) {
    const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    if (receiveError(state, message, token)) render();
  }
}

function renderHome(): void {
  const page = el('div', 'page home');
  page.append(el('h1', undefined, 'termlink'));
  page.append(el('p', 'tagline', 'Enlaza texto clínico con conceptos de la terminología'));

  if (state.error) {
    const banner = el('div', 'banner error');
    banner.append(el('span', undefined, state.error), ' ');
    const retry = el('button', undefined, 'reintentar');
    retry.addEventListener('click', () => void submit());
    banner.append(retry);
    page.append(banner);
  }

  const textarea = el('textarea') as HTMLTextAreaElement;
  textarea.placeholder = 'Introduzca su texto…';
  textarea.value = state.text;
  textarea.addEventListener('input', () => {
    state.text = textarea.value;
  });
  page.append(textarea);

  page.append(configControls());

  const annotate = el('button', 'primary', state.pending ? 'procesando…' : 'Anotar');
  annotate.disabled = state.pending || !state.text.trim();
  annotate.addEventListener('click', () => void submit());
  page.append(annotate);

  const treeBox = el('div', 'tree-box');
  treeBox.append(el('h2', undefined, 'Tipos semánticos'));
  treeBox.append(
    el(
      'p',
      'hint',
      state.selectedTuis.size
        ? `${state.selectedTuis.size} tipos seleccionados`
        : 'sin selección: se usan todos los tipos',
    ),
  );
  if (state.semnet) renderTree(treeBox, state.semnet);
  else treeBox.append(el('p', 'hint', 'cargando la red semántica…'));
  page.append(treeBox);

  root.append(page);
}

// ------------------------------------------------------------- results page

function renderHighlightedText(container: HTMLElement): void {
  const doc = state.doc!;
  const segments = computeSegments(doc.text.length, doc.annotations);
  for (const segment of segments) {
    const piece = doc.text.slice(segment.start, segment.end);
    if (segment.top === null) {
      container.append(document.createTextNode(piece));
      continue;
    }
    const annotation = doc.annotations[segment.top];
    const mark = el('mark', 'hl', piece);
    mark.dataset.ann = String(segment.top);
    mark.style.background = typeColor(annotation.tuis[0] ?? '');
    mark.title = `${annotation.preferred_name} (${annotation.cui})`;
    mark.addEventListener('mouseenter', () => setHover(segment.top, true));
    mark.addEventListener('mouseleave', () => setHover(segment.top, false));
    mark.addEventListener('click', () => void selectConcept(annotation.cui));
    container.append(mark);
  }
}

function setHover(annIndex: number | null, on: boolean): void {
  if (annIndex === null) return;
  // discontinuous annotations share data-ann, so every piece lights up
  document.querySelectorAll(`mark[data-ann="${annIndex}"]`).forEach((node) => {
    node.classList.toggle('hover', on);
  });
}

async function selectConcept(cui: string): Promise<void> {
  state.selectedCui = cui;
  if (!state.cards.has(cui)) {
    try {
      cacheCard(state, await api.concept(cui));
    } catch (err) {
      state.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }
  render();
}

function renderCard(container: HTMLElement, card: ConceptCard): void {
  container.append(el('h3', undefined, card.preferred_name));
  container.append(el('p', 'cui', card.cui));
  const types = el('p', 'types');
  for (const st of card.semantic_types) {
    const chip = el('span', 'chip', st.name ?? st.tui);
    chip.style.background = typeColor(st.tui);
    types.append(chip);
  }
  container.append(types);
  if (card.definition) container.append(el('p', undefined, card.definition));

  const terms = el('div', 'card-terms');
  terms.append(el('h4', undefined, 'Términos por fuente'));
  for (const [source, list] of Object.entries(card.terms_by_source)) {
    terms.append(el('p', undefined, `${source} (${list.length}): ${list.join('; ')}`));
  }
  container.append(terms);

  const relation = (title: string, concepts: { cui: string; name: string }[]) => {
    const box = el('div', 'card-relations');
    box.append(el('h4', undefined, title));
    if (!concepts.length) box.append(el('p', 'hint', '—'));
    for (const c of concepts) {
      const link = el('a', 'concept-link', c.name) as HTMLAnchorElement;
      link.href = '#';
      link.addEventListener('click', (event) => {
        event.preventDefault();
        void selectConcept(c.cui); // navigates the card only, document state stays
      });
      const line = el('p');
      line.append(link, el('span', 'cui', ` ${c.cui}`));
      box.append(line);
    }
    return box;
  };
  container.append(relation('Hiperónimos (es un)', card.hypernyms));
  container.append(relation('Hipónimos', card.hyponyms));
}

function renderResults(): void {
  const doc = state.doc!;
  const page = el('div', 'page results');

  const bar = el('div', 'topbar');
  const back = el('button', undefined, '← nueva consulta');
  back.addEventListener('click', () => {
    state.view = 'home';
    render();
  });
  bar.append(back, el('span', 'doc-meta', `${doc.annotations.length} anotaciones`));
  page.append(bar);

  const columns = el('div', 'columns');

  // left: semantic types found, expanding to the concepts beneath them
  const left = el('div', 'col col-types');
  left.append(el('h2', undefined, 'Tipos semánticos'));
  const groups = annotationsByType(doc);
  if (!groups.size) left.append(el('p', 'hint', 'sin anotaciones'));
  for (const [tui, annIndexes] of groups) {
    const details = el('details') as HTMLDetailsElement;
    details.open = true;
    const summary = el('summary');
    const swatch = el('span', 'tree-swatch');
    swatch.style.background = typeColor(tui);
    summary.append(swatch, ` ${typeName(tui)} (${annIndexes.length})`);
    details.append(summary);
    for (const index of annIndexes) {
      const annotation = doc.annotations[index];
      const link = el('a', 'concept-link', annotation.preferred_name) as HTMLAnchorElement;
      link.href = '#';
      link.addEventListener('click', (event) => {
        event.preventDefault();
        void selectConcept(annotation.cui);
      });
      const line = el('p');
      line.append(link);
      details.append(line);
    }
    left.append(details);
  }

  // middle: the submitted text with colored highlights
  const middle = el('div', 'col col-text');
  middle.append(el('h2', undefined, 'Texto'));
  const textBox = el('div', 'annotated-text');
  renderHighlightedText(textBox);
  middle.append(textBox);

  // right: concept detail with hypernym/hyponym navigation
  const right = el('div', 'col col-card');
  right.append(el('h2', undefined, 'Concepto'));
  if (state.selectedCui && state.cards.has(state.selectedCui)) {
    renderCard(right, state.cards.get(state.selectedCui)!);
  } else {
    right.append(el('p', 'hint', 'seleccione una anotación o un concepto'));
  }

  columns.append(left, middle, right);
  page.append(columns);
  root.append(page);
}

// ------------------------------------------------------------------- render

function render(): void {
  root.textContent = '';
  if (state.view === 'home' || !state.doc) renderHome();
  else renderResults();
}

async function boot(): Promise<void> {
  render();
  try {
    const semnet = await api.semanticNetwork();
    state.semnet = semnet;
    semnetParents = parentMap(semnet);
    semnetNames = nodeIndex(semnet);
  } catch (err) {
    state.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  }
  render();
}

void boot();
