/**
 * The touch emotion wheel: 8 sectors x 3 rings drawn from the geometry the
 * gateway ships in the emotions payload (angle_start/angle_end in degrees,
 * ring 0 innermost). Taps resolve back to a cell with cellAtPoint, the
 * exact inverse of cellMidpoint, and surface as both an onSelect callback
 * and a bubbling "emotion-selected" CustomEvent.
 */

import { EmotionCell } from "./types.js";

export interface WheelGeometry {
  size: number; // viewBox is size x size, centre at size/2
  innerRadius: number; // hole for the legend
  outerRadius: number;
  rings: number;
}

export const WHEEL_GEOMETRY: WheelGeometry = {
  size: 440,
  innerRadius: 52,
  outerRadius: 212,
  rings: 3,
};

const SECTOR_FILLS = [
  "#f4d35e",
  "#9bc53d",
  "#5bc0eb",
  "#c3b1e1",
  "#7798c8",
  "#b5651d",
  "#e55934",
  "#fa7921",
];
const RING_OPACITY = [1.0, 0.78, 0.56];

export interface SelectedEmotion {
  sector: string;
  intensity: string;
  label: string;
}

function toRadians(angleDeg: number): number {
  // Payload angle 0 sits at 12 o'clock; angles grow clockwise on screen.
  return ((angleDeg - 90) * Math.PI) / 180;
}

export function ringBounds(
  ringIndex: number,
  geometry: WheelGeometry = WHEEL_GEOMETRY,
): [number, number] {
  const width = (geometry.outerRadius - geometry.innerRadius) / geometry.rings;
  return [
    geometry.innerRadius + width * ringIndex,
    geometry.innerRadius + width * (ringIndex + 1),
  ];
}

export function cellMidpoint(
  cell: EmotionCell,
  geometry: WheelGeometry = WHEEL_GEOMETRY,
): { x: number; y: number } {
  const [inner, outer] = ringBounds(cell.ring_index, geometry);
  const radius = (inner + outer) / 2;
  const angle = toRadians((cell.angle_start + cell.angle_end) / 2);
  const centre = geometry.size / 2;
  return { x: centre + radius * Math.cos(angle), y: centre + radius * Math.sin(angle) };
}

export function cellAtPoint(
  cells: readonly EmotionCell[],
  x: number,
  y: number,
  geometry: WheelGeometry = WHEEL_GEOMETRY,
): EmotionCell | null {
  const centre = geometry.size / 2;
  const dx = x - centre;
  const dy = y - centre;
  const radius = Math.hypot(dx, dy);
  if (radius < geometry.innerRadius || radius >= geometry.outerRadius) return null;
  const ringWidth = (geometry.outerRadius - geometry.innerRadius) / geometry.rings;
  const ringIndex = Math.min(
    Math.floor((radius - geometry.innerRadius) / ringWidth),
    geometry.rings - 1,
  );
  let angle = (Math.atan2(dy, dx) * 180) / Math.PI + 90;
  if (angle < 0) angle += 360;
  if (angle >= 360) angle -= 360;
  for (const cell of cells) {
    if (cell.ring_index !== ringIndex) continue;
    if (angle >= cell.angle_start && angle < cell.angle_end) return cell;
  }
  return null;
}

export function wedgePath(
  cell: EmotionCell,
  geometry: WheelGeometry = WHEEL_GEOMETRY,
): string {
  const [inner, outer] = ringBounds(cell.ring_index, geometry);
  const centre = geometry.size / 2;
  const a0 = toRadians(cell.angle_start);
  const a1 = toRadians(cell.angle_end);
  const point = (radius: number, angle: number) =>
    `${(centre + radius * Math.cos(angle)).toFixed(2)},${(centre + radius * Math.sin(angle)).toFixed(2)}`;
  const large = cell.angle_end - cell.angle_start > 180 ? 1 : 0;
  return [
    `M${point(inner, a0)}`,
    `L${point(outer, a0)}`,
    `A${outer},${outer} 0 ${large},1 ${point(outer, a1)}`,
    `L${point(inner, a1)}`,
    `A${inner},${inner} 0 ${large},0 ${point(inner, a0)}`,
    "z",
  ].join(" ");
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function createWheel(
  cells: readonly EmotionCell[],
  onSelect?: (selected: SelectedEmotion) => void,
  geometry: WheelGeometry = WHEEL_GEOMETRY,
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("class", "emotion-wheel");
  svg.setAttribute("viewBox", `0 0 ${geometry.size} ${geometry.size}`);
  svg.setAttribute("width", String(geometry.size));
  svg.setAttribute("height", String(geometry.size));
  svg.setAttribute("role", "group");
  svg.setAttribute("aria-label", "emotion wheel");

  const select = (cell: EmotionCell) => {
    const detail: SelectedEmotion = {
      sector: cell.sector,
      intensity: cell.intensity,
      label: cell.label,
    };
    svg.dispatchEvent(
      new CustomEvent<SelectedEmotion>("emotion-selected", { detail, bubbles: true }),
    );
    if (onSelect) onSelect(detail);
  };

  for (const cell of cells) {
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", wedgePath(cell, geometry));
    path.setAttribute("class", "wheel-cell");
    path.setAttribute("data-sector", cell.sector);
    path.setAttribute("data-intensity", cell.intensity);
    path.setAttribute("fill", SECTOR_FILLS[cell.sector_index % SECTOR_FILLS.length]);
    path.setAttribute("fill-opacity", String(RING_OPACITY[cell.ring_index % RING_OPACITY.length]));
    path.setAttribute("stroke", "#ffffff");
    path.setAttribute("stroke-width", "2");
    path.setAttribute("role", "button");
    path.setAttribute("tabindex", "0");
    path.setAttribute("aria-label", cell.label);
    path.addEventListener("keydown", (event) => {
      const key = (event as KeyboardEvent).key;
      if (key === "Enter" || key === " ") {
        event.preventDefault();
        select(cell);
      }
    });
    svg.appendChild(path);

    const mid = cellMidpoint(cell, geometry);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", mid.x.toFixed(2));
    text.setAttribute("y", mid.y.toFixed(2));
    text.setAttribute("class", "wheel-label");
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("dominant-baseline", "middle");
    text.setAttribute("pointer-events", "none");
    text.textContent = cell.label;
    svg.appendChild(text);
  }

  svg.addEventListener("click", (event) => {
    const mouse = event as MouseEvent;
    const rect = svg.getBoundingClientRect();
    // Zero-size rects (no layout yet) fall back to identity scaling.
    const scaleX = rect.width > 0 ? geometry.size / rect.width : 1;
    const scaleY = rect.height > 0 ? geometry.size / rect.height : 1;
    const x = (mouse.clientX - rect.left) * scaleX;
    const y = (mouse.clientY - rect.top) * scaleY;
    const cell = cellAtPoint(cells, x, y, geometry);
    if (cell) select(cell);
  });

  return svg;
}
