/** Vector re-rendering of SceneDescriptors.
 *
 * Scenes are rendered to a list of draw commands (pure data, unit-testable)
 * which a thin canvas executor then paints. This gives crisp upscaled
 * graphics instead of blurry 36x36 rasters; the raster remains available as
 * a debug view of exactly what the policy sees.
 */

import type { SceneDescriptor, SceneObject } from "./types";

export const PALETTE: Record<string, string> = {
  red: "rgb(220,40,40)",
  green: "rgb(40,200,60)",
  blue: "rgb(50,90,220)",
  yellow: "rgb(230,220,50)",
  orange: "rgb(240,150,40)",
  pink: "rgb(240,120,190)",
  white: "rgb(255,255,255)",
  grey: "rgb(120,120,120)",
  background: "rgb(20,20,25)",
};

export type DrawCommand =
  | { kind: "rect"; x: number; y: number; w: number; h: number; color: string; label?: string }
  | { kind: "circle"; cx: number; cy: number; r: number; color: string; label?: string };

const DOORKEY_GRID = 9;
const DOORKEY_WALL_X = 4;
const NAV2D_GOAL_HALF = 2.5 / 36; // goal footprint is 5px on the 36px raster
const NAV2D_AGENT_HALF = 1.5 / 36;

function presentObjects(scene: SceneDescriptor): SceneObject[] {
  return scene.objects.filter((o) => o.present && o.position !== null);
}

function renderNav2d(scene: SceneDescriptor, size: number): DrawCommand[] {
  const cmds: DrawCommand[] = [
    { kind: "rect", x: 0, y: 0, w: size, h: size, color: PALETTE.background },
  ];
  for (const obj of presentObjects(scene)) {
    const [x, y] = obj.position as number[];
    const half = NAV2D_GOAL_HALF * size;
    cmds.push({
      kind: "rect",
      x: x * size - half,
      y: y * size - half,
      w: 2 * half,
      h: 2 * half,
      color: PALETTE[obj.values[0]] ?? PALETTE.grey,
      label: obj.name,
    });
  }
  const [ax, ay] = scene.agent_pos;
  cmds.push({
    kind: "circle",
    cx: ax * size,
    cy: ay * size,
    r: NAV2D_AGENT_HALF * size,
    color: PALETTE.white,
    label: "agent",
  });
  return cmds;
}

function renderDoorkey(scene: SceneDescriptor, size: number): DrawCommand[] {
  const cell = size / DOORKEY_GRID;
  const cmds: DrawCommand[] = [
    { kind: "rect", x: 0, y: 0, w: size, h: size, color: PALETTE.background },
  ];
  const door = scene.objects.find((o) => o.name === "door");
  const doorCell = door?.position ?? null;
  for (let y = 0; y < DOORKEY_GRID; y++) {
    // the vertical wall, skipping the door cell (drawn with the objects)
    if (doorCell && doorCell[0] === DOORKEY_WALL_X && doorCell[1] === y) continue;
    cmds.push({
      kind: "rect",
      x: DOORKEY_WALL_X * cell,
      y: y * cell,
      w: cell,
      h: cell,
      color: PALETTE.grey,
      label: "wall",
    });
  }
  for (const obj of presentObjects(scene)) {
    if (obj.name === "key" && scene.key_held) continue; // carried, not on the floor
    const [cx, cy] = obj.position as number[];
    const color = PALETTE[obj.values[0]] ?? PALETTE.grey;
    if (obj.name === "door" && scene.door_open) {
      // open door: thin frame instead of a filled cell
      cmds.push({
        kind: "rect",
        x: cx * cell + cell * 0.35,
        y: cy * cell,
        w: cell * 0.3,
        h: cell,
        color,
        label: "door-open",
      });
    } else {
      cmds.push({
        kind: "rect",
        x: cx * cell,
        y: cy * cell,
        w: cell,
        h: cell,
        color,
        label: obj.name,
      });
    }
  }
  const [ax, ay] = scene.agent_pos;
  cmds.push({
    kind: "circle",
    cx: (ax + 0.5) * cell,
    cy: (ay + 0.5) * cell,
    r: cell * 0.35,
    color: PALETTE.white,
    label: "agent",
  });
  return cmds;
}

/** Scene -> draw-command list at the given pixel size. */
export function renderScene(scene: SceneDescriptor, size: number): DrawCommand[] {
  return scene.domain === "nav2d" ? renderNav2d(scene, size) : renderDoorkey(scene, size);
}

/** Paint a command list onto a 2D canvas context. */
export function paint(ctx: CanvasRenderingContext2D, cmds: DrawCommand[]): void {
  for (const cmd of cmds) {
    ctx.fillStyle = cmd.color;
    if (cmd.kind === "rect") {
      ctx.fillRect(cmd.x, cmd.y, cmd.w, cmd.h);
    } else {
      ctx.beginPath();
      ctx.arc(cmd.cx, cmd.cy, cmd.r, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

/** data: URL for a PNG frame payload (the raster debug view). */
export function frameDataUrl(frame: { encoding: string; data: string }): string {
  if (frame.encoding !== "png") throw new Error(`unsupported encoding ${frame.encoding}`);
  return `data:image/png;base64,${frame.data}`;
}
