/** Static periodic-table layout for the scatterer picker.  Which symbols
 *  are clickable comes from the server's scattering table; the layout is
 *  fixed client-side data. */

export interface PickerCell {
  symbol: string;
  period: number; // 1-based row
  group: number; // 1-based column, 1..18
  enabled: boolean;
}

/** Periods 1 to 5 in standard 18-column layout. */
const LAYOUT: [string, number, number][] = [
  ["H", 1, 1], ["He", 1, 18],
  ["Li", 2, 1], ["Be", 2, 2], ["B", 2, 13], ["C", 2, 14], ["N", 2, 15],
  ["O", 2, 16], ["F", 2, 17], ["Ne", 2, 18],
  ["Na", 3, 1], ["Mg", 3, 2], ["Al", 3, 13], ["Si", 3, 14], ["P", 3, 15],
  ["S", 3, 16], ["Cl", 3, 17], ["Ar", 3, 18],
  ["K", 4, 1], ["Ca", 4, 2], ["Sc", 4, 3], ["Ti", 4, 4], ["V", 4, 5],
  ["Cr", 4, 6], ["Mn", 4, 7], ["Fe", 4, 8], ["Co", 4, 9], ["Ni", 4, 10],
  ["Cu", 4, 11], ["Zn", 4, 12], ["Ga", 4, 13], ["Ge", 4, 14], ["As", 4, 15],
  ["Se", 4, 16], ["Br", 4, 17], ["Kr", 4, 18],
  ["Rb", 5, 1], ["Sr", 5, 2], ["Y", 5, 3], ["Zr", 5, 4], ["Nb", 5, 5],
  ["Mo", 5, 6], ["Tc", 5, 7], ["Ru", 5, 8], ["Rh", 5, 9], ["Pd", 5, 10],
  ["Ag", 5, 11], ["Cd", 5, 12], ["In", 5, 13], ["Sn", 5, 14], ["Sb", 5, 15],
  ["Te", 5, 16], ["I", 5, 17], ["Xe", 5, 18],
];

/** Cells for the picker grid; a cell is enabled iff its symbol (or an ion
 *  of it, like "Fe2+") appears in the available scatterer labels. */
export function buildPickerCells(available: string[]): PickerCell[] {
  const bySymbol = new Map<string, boolean>();
  for (const label of available) {
    const element = label.replace(/[0-9+-]+$/, "");
    bySymbol.set(element, true);
  }
  return LAYOUT.map(([symbol, period, group]) => ({
    symbol,
    period,
    group,
    enabled: bySymbol.has(symbol),
  }));
}

/** Scatterer labels (element plus its ions) behind one picker cell. */
export function labelsForSymbol(available: string[], symbol: string): string[] {
  return available.filter((label) => label.replace(/[0-9+-]+$/, "") === symbol);
}
