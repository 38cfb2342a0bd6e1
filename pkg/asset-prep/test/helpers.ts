import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import type { RawImage } from '../src/formats.js';
import { writeRgbImage } from '../src/formats.js';

/** Small deterministic PRNG so scenes are stable across runs. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Photo-like synthetic scene: a vertical sky gradient with pixel noise and
 * a bright elliptical subject near the center. The subject contrasts with
 * the border, so the default segmenter finds it.
 */
export function makeScene(seed: number, width: number, height: number): RawImage {
  const rng = mulberry32(seed);
  const data = Buffer.alloc(4 * width * height);

  const blobR = 180 + Math.floor(rng() * 75);
  const blobG = 110 + Math.floor(rng() * 90);
  const blobB = 40 + Math.floor(rng() * 70);
  const cx = width / 2 + (rng() - 0.5) * width * 0.15;
  const cy = height / 2 + (rng() - 0.5) * height * 0.15;
  const rx = width * (0.18 + rng() * 0.08);
  const ry = height * (0.22 + rng() * 0.08);

  for (let r = 0; r < height; r++) {
    const t = height > 1 ? r / (height - 1) : 0;
    for (let c = 0; c < width; c++) {
      const i = 4 * (r * width + c);
      const noise = () => (rng() - 0.5) * 24;
      const inBlob =
        ((c - cx) / rx) * ((c - cx) / rx) + ((r - cy) / ry) * ((r - cy) / ry) <= 1;
      const base = inBlob
        ? [blobR, blobG, blobB]
        : [20 + 100 * t, 40 + 90 * t, 90 + 50 * t];
      data[i] = Math.max(0, Math.min(255, Math.round(base[0]! + noise())));
      data[i + 1] = Math.max(0, Math.min(255, Math.round(base[1]! + noise())));
      data[i + 2] = Math.max(0, Math.min(255, Math.round(base[2]! + noise())));
      data[i + 3] = 255;
    }
  }
  return { width, height, data };
}

export function constantImage(width: number, height: number, value = 128): RawImage {
  const data = Buffer.alloc(4 * width * height);
  for (let i = 0; i < width * height; i++) {
    data[4 * i] = value;
    data[4 * i + 1] = value;
    data[4 * i + 2] = value;
    data[4 * i + 3] = 255;
  }
  return { width, height, data };
}

export function sceneFile(dir: string, name: string, image: RawImage): string {
  const path = join(dir, name);
  writeRgbImage(image, path);
  return path;
}

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

export function norm(vector: Float32Array): number {
  let total = 0;
  for (const v of vector) total += v * v;
  return Math.sqrt(total);
}
