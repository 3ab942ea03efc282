/** Top-down 2D canvas view of the tabletop from compact world states. */

import type { WorldDict } from './types.js';

// mirrors the simulator's fixed geometry
const WORKSPACE = 0.6;
const BLOCK_WIDTH = 0.05;
const BIN_RECT = { x0: 0.46, y0: 0.46, x1: 0.6, y1: 0.6 };

const BLOCK_COLORS: Record<string, string> = {
  red: '#d64545',
  green: '#3f9b55',
  blue: '#3f6fd6',
  yellow: '#d6b53f',
};

export function blockColor(name: string): string {
  return BLOCK_COLORS[name] ?? '#888888';
}

export function drawTabletop(canvas: HTMLCanvasElement, world: WorldDict): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return; // headless test runs have no 2d context
  const size = Math.min(canvas.width, canvas.height);
  const px = (v: number) => (v / WORKSPACE) * size;
  // y grows upward in the workspace, downward on the canvas
  const py = (v: number) => size - px(v);

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#1e2227';
  ctx.fillRect(0, 0, size, size);

  if (world.has_bin) {
    ctx.fillStyle = 'rgba(120, 120, 140, 0.25)';
    ctx.strokeStyle = '#78788c';
    const w = px(BIN_RECT.x1 - BIN_RECT.x0);
    const h = px(BIN_RECT.y1 - BIN_RECT.y0);
    ctx.fillRect(px(BIN_RECT.x0), py(BIN_RECT.y1), w, h);
    ctx.strokeRect(px(BIN_RECT.x0), py(BIN_RECT.y1), w, h);
  }

  const side = px(BLOCK_WIDTH);
  // table blocks first, stacked blocks on top, held block last
  const order = [...world.blocks].sort((a, b) => (a.pos[2] ?? 0) - (b.pos[2] ?? 0));
  for (const block of order) {
    const held = world.held === block.name;
    const x = px(block.pos[0]) - side / 2;
    const y = py(block.pos[1]) - side / 2;
    ctx.fillStyle = blockColor(block.name);
    ctx.globalAlpha = block.in_bin ? 0.55 : 1.0;
    ctx.fillRect(x, y, side, side);
    ctx.globalAlpha = 1.0;
    ctx.strokeStyle = held ? '#ffffff' : '#00000055';
    ctx.lineWidth = held ? 2 : 1;
    ctx.strokeRect(x, y, side, side);
    if (block.stacked_on) {
      ctx.strokeStyle = '#ffffffaa';
      ctx.lineWidth = 1;
      ctx.strokeRect(x + 3, y + 3, side - 6, side - 6);
    }
    ctx.fillStyle = '#e8e8e8';
    ctx.font = '10px sans-serif';
    ctx.fillText(block.name, x + 2, y - 3);
  }

  // gripper crosshair
  const gx = px(world.gripper[0]);
  const gy = py(world.gripper[1]);
  ctx.strokeStyle = world.grip_closed ? '#ffd34d' : '#9ad1ff';
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(gx - 7, gy);
  ctx.lineTo(gx + 7, gy);
  ctx.moveTo(gx, gy - 7);
  ctx.lineTo(gx, gy + 7);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(gx, gy, 4.5, 0, Math.PI * 2);
  ctx.stroke();
}
