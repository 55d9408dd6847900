/** Single source of truth for every view: the current selection.
 *
 * Results are selected in order (the first is the reference for fiber
 * diffs, the last drives dissimilarity coloring). A fiber selection stays
 * active until it is cancelled or replaced. Each mutation bumps a version
 * used to discard stale service responses.
 */

export interface SelectionState {
  selectedResults: number[];
  selectedFibers: number[];
  activeCells: { param: string; char: string }[];
  slice: { axis: "x" | "y" | "z"; index: number };
  version: number;
}

export type Listener = (state: SelectionState) => void;

export class SelectionStore {
  private state: SelectionState = {
    selectedResults: [],
    selectedFibers: [],
    activeCells: [],
    slice: { axis: "z", index: 0 },
    version: 0,
  };
  private listeners: Listener[] = [];

  get(): SelectionState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private commit(partial: Partial<SelectionState>): void {
    this.state = { ...this.state, ...partial, version: this.state.version + 1 };
    for (const listener of [...this.listeners]) listener(this.state);
  }

  /** The reference result is always the first selected. */
  get reference(): number | null {
    return this.state.selectedResults[0] ?? null;
  }

  /** Dissimilarity coloring refers to the result selected last. */
  get lastSelected(): number | null {
    const sel = this.state.selectedResults;
    return sel.length ? sel[sel.length - 1] : null;
  }

  toggleResult(id: number): void {
    const sel = this.state.selectedResults;
    this.commit({
      selectedResults: sel.includes(id) ? sel.filter((s) => s !== id) : [...sel, id],
    });
  }

  selectResults(ids: number[]): void {
    this.commit({ selectedResults: [...ids] });
  }

  /** Replaces the active fiber selection (it persists until replaced). */
  selectFibers(ids: number[]): void {
    this.commit({ selectedFibers: [...ids] });
  }

  cancelFiberSelection(): void {
    this.commit({ selectedFibers: [] });
  }

  toggleCell(param: string, char: string): void {
    const cells = this.state.activeCells;
    const active = cells.some((c) => c.param === param && c.char === char);
    this.commit({
      activeCells: active
        ? cells.filter((c) => !(c.param === param && c.char === char))
        : [...cells, { param, char }],
    });
  }

  setSlice(axis: "x" | "y" | "z", index: number): void {
    this.commit({ slice: { axis, index } });
  }

  clear(): void {
    this.commit({ selectedResults: [], selectedFibers: [], activeCells: [] });
  }
}
