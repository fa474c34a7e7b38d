/** Fixed label palette: stable colors for painting and the legend. */

export interface PaletteEntry {
  label: number;
  name: string;
  color: string;
}

export const LABEL_PALETTE: PaletteEntry[] = [
  { label: 0, name: "sky", color: "#7ec8ff" },
  { label: 1, name: "ground", color: "#b58a5a" },
  { label: 2, name: "tree", color: "#3f8f4a" },
  { label: 3, name: "water", color: "#2e6fd8" },
  { label: 4, name: "mountain", color: "#8d8d99" },
  { label: 5, name: "building", color: "#c9584e" },
];

export function colorFor(label: number): string {
  const entry = LABEL_PALETTE[label];
  return entry ? entry.color : "#000000";
}
