/**
 * Model registry for the preparation pipeline.
 *
 * Every stage (depth, segmentation, encoders, captioner, face locator) is
 * resolved by name, so swapping in a heavier model is a registration, not a
 * code change. The built-ins below are deterministic image-statistics
 * models: they keep the pipeline runnable offline and give tests stable
 * outputs. A deployment that wants learned models registers adapters with
 * the same interfaces and selects them by name.
 */

import type { DepthGrid, RawImage } from './formats.js';
import { UnknownModelError } from './errors.js';

/** Axis-aligned box: x = row, y = col, w = cols, h = rows. */
export interface FaceBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface DepthModel {
  readonly name: string;
  /** Dense depth, far-high convention: larger values are farther away. */
  estimate(image: RawImage): DepthGrid;
}

export interface SegmentationModel {
  readonly name: string;
  /** Binary subject mask, 0/1 per pixel, row-major. May be all zero. */
  segment(image: RawImage): Uint8Array;
}

export interface ImageEncoder {
  readonly name: string;
  readonly dim: number;
  /** Unit-norm visual embedding. */
  encode(image: RawImage): Float32Array;
}

export interface CaptionEncoder {
  readonly name: string;
  readonly dim: number;
  /** Unit-norm text embedding of a caption. */
  encode(caption: string): Float32Array;
}

export interface Captioner {
  readonly name: string;
  /** Short non-empty description of the image. */
  caption(image: RawImage): string;
}

export interface FaceLocator {
  readonly name: string;
  /** Face box inside the subject mask, or null when none is found. */
  locate(image: RawImage, mask: Uint8Array): FaceBox | null;
}

export interface ModelSuite {
  depth: DepthModel;
  segmentation: SegmentationModel;
  imageEncoder: ImageEncoder;
  captionEncoder: CaptionEncoder;
  captioner: Captioner;
  faceLocator: FaceLocator;
}

function luminanceAt(image: RawImage, index: number): number {
  const r = image.data[4 * index]!;
  const g = image.data[4 * index + 1]!;
  const b = image.data[4 * index + 2]!;
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255;
}

/**
 * Depth from a vertical prior blended with inverse luminance: the top of
 * the frame reads as far, dark pixels read as farther than bright ones.
 * Crude next to a learned monocular model, but monotone, deterministic and
 * in the right convention.
 */
const luminanceDepth: DepthModel = {
  name: 'luminance-depth',
  estimate(image) {
    const { width, height } = image;
    const values = new Float32Array(width * height);
    for (let r = 0; r < height; r++) {
      const vertical = height > 1 ? 1 - r / (height - 1) : 0;
      for (let c = 0; c < width; c++) {
        const i = r * width + c;
        values[i] = 0.65 * vertical + 0.35 * (1 - luminanceAt(image, i));
      }
    }
    return { width, height, values };
  },
};

/**
 * Subject mask from contrast against the border ring, weighted by a center
 * prior. A uniform image has no contrast anywhere, so it segments to
 * nothing rather than to a made-up subject.
 */
const borderContrast: SegmentationModel = {
  name: 'border-contrast',
  segment(image) {
    const { width, height } = image;
    let borderCount = 0;
    let meanR = 0;
    let meanG = 0;
    let meanB = 0;
    for (let r = 0; r < height; r++) {
      for (let c = 0; c < width; c++) {
        if (r === 0 || r === height - 1 || c === 0 || c === width - 1) {
          const i = 4 * (r * width + c);
          meanR += image.data[i]!;
          meanG += image.data[i + 1]!;
          meanB += image.data[i + 2]!;
          borderCount++;
        }
      }
    }
    meanR /= borderCount;
    meanG /= borderCount;
    meanB /= borderCount;

    const score = new Float64Array(width * height);
    let maxScore = 0;
    const cy = (height - 1) / 2;
    const cx = (width - 1) / 2;
    const sy = Math.max(1, height / 3);
    const sx = Math.max(1, width / 3);
    for (let r = 0; r < height; r++) {
      for (let c = 0; c < width; c++) {
        const i = r * width + c;
        const dr = image.data[4 * i]! - meanR;
        const dg = image.data[4 * i + 1]! - meanG;
        const db = image.data[4 * i + 2]! - meanB;
        const contrast = Math.sqrt(dr * dr + dg * dg + db * db) / (Math.sqrt(3) * 255);
        const prior = Math.exp(
          -((r - cy) * (r - cy)) / (2 * sy * sy) - ((c - cx) * (c - cx)) / (2 * sx * sx),
        );
        score[i] = contrast * prior;
        if (score[i]! > maxScore) maxScore = score[i]!;
      }
    }

    const mask = new Uint8Array(width * height);
    const threshold = Math.max(0.05, 0.35 * maxScore);
    for (let i = 0; i < mask.length; i++) {
      mask[i] = score[i]! > threshold ? 1 : 0;
    }
    return mask;
  },
};

/** 4x4x4 RGB histogram, L2-normalized. 64 dimensions. */
const colorHistogram: ImageEncoder = {
  name: 'color-histogram',
  dim: 64,
  encode(image) {
    const counts = new Float64Array(64);
    const pixels = image.width * image.height;
    for (let i = 0; i < pixels; i++) {
      const r = image.data[4 * i]! >> 6;
      const g = image.data[4 * i + 1]! >> 6;
      const b = image.data[4 * i + 2]! >> 6;
      counts[(r << 4) | (g << 2) | b]!++;
    }
    let norm = 0;
    for (const c of counts) norm += c * c;
    norm = Math.sqrt(norm);
    const vector = new Float32Array(64);
    for (let i = 0; i < 64; i++) vector[i] = counts[i]! / norm;
    return vector;
  },
};

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash;
}

/** Signed character-trigram hashing into 64 buckets, L2-normalized. */
const charNgram: CaptionEncoder = {
  name: 'char-ngram',
  dim: 64,
  encode(caption) {
    const padded = `^${caption.toLowerCase()}$`;
    const buckets = new Float64Array(64);
    for (let i = 0; i + 3 <= padded.length; i++) {
      const hash = fnv1a(padded.slice(i, i + 3));
      const sign = hash & 0x80 ? 1 : -1;
      buckets[hash % 64]! += sign;
    }
    let norm = 0;
    for (const b of buckets) norm += b * b;
    norm = Math.sqrt(norm);
    const vector = new Float32Array(64);
    if (norm > 0) {
      for (let i = 0; i < 64; i++) vector[i] = buckets[i]! / norm;
    } else {
      vector[fnv1a(padded) % 64] = 1;
    }
    return vector;
  },
};

/** Template caption from global image statistics. Always non-empty. */
const statTemplate: Captioner = {
  name: 'stat-template',
  caption(image) {
    const pixels = image.width * image.height;
    let lum = 0;
    let red = 0;
    let blue = 0;
    for (let i = 0; i < pixels; i++) {
      lum += luminanceAt(image, i);
      red += image.data[4 * i]!;
      blue += image.data[4 * i + 2]!;
    }
    lum /= pixels;
    const tone = lum < 0.33 ? 'dark' : lum < 0.66 ? 'dim' : 'bright';
    const cast = red > blue * 1.1 ? 'warm' : blue > red * 1.1 ? 'cool' : 'neutral';
    const shape =
      image.height > image.width
        ? 'portrait'
        : image.width > image.height
          ? 'landscape'
          : 'square';
    return `a ${tone} ${cast} ${shape} photo`;
  },
};

/**
 * Face box as the top band of the subject mask: faces sit at the top of a
 * standing or seated person. Stands in for a detector; manual annotation
 * or a learned locator can replace it by name.
 */
const maskTop: FaceLocator = {
  name: 'mask-top',
  locate(image, mask) {
    const { width, height } = image;
    let top = height;
    let bottom = -1;
    let left = width;
    let right = -1;
    for (let r = 0; r < height; r++) {
      for (let c = 0; c < width; c++) {
        if (mask[r * width + c]) {
          if (r < top) top = r;
          if (r > bottom) bottom = r;
          if (c < left) left = c;
          if (c > right) right = c;
        }
      }
    }
    if (bottom < 0) return null;
    const boxRows = Math.max(1, Math.round((bottom - top + 1) * 0.3));
    const boxCols = Math.max(1, Math.round((right - left + 1) * 0.5));
    return {
      x: top,
      y: left + Math.floor((right - left + 1 - boxCols) / 2),
      w: boxCols,
      h: boxRows,
    };
  },
};

interface ModelByKind {
  depth: DepthModel;
  segmentation: SegmentationModel;
  imageEncoder: ImageEncoder;
  captionEncoder: CaptionEncoder;
  captioner: Captioner;
  faceLocator: FaceLocator;
}

export type ModelKind = keyof ModelByKind;

type Registries = { [K in ModelKind]: Map<string, ModelByKind[K]> };

const registries: Registries = {
  depth: new Map([[luminanceDepth.name, luminanceDepth]]),
  segmentation: new Map([[borderContrast.name, borderContrast]]),
  imageEncoder: new Map([[colorHistogram.name, colorHistogram]]),
  captionEncoder: new Map([[charNgram.name, charNgram]]),
  captioner: new Map([[statTemplate.name, statTemplate]]),
  faceLocator: new Map([[maskTop.name, maskTop]]),
};

export const DEFAULT_MODELS: { [K in ModelKind]: string } = {
  depth: luminanceDepth.name,
  segmentation: borderContrast.name,
  imageEncoder: colorHistogram.name,
  captionEncoder: charNgram.name,
  captioner: statTemplate.name,
  faceLocator: maskTop.name,
};

export function registerModel<K extends ModelKind>(
  kind: K,
  model: ModelByKind[K],
): void {
  (registries[kind] as Map<string, ModelByKind[K]>).set(model.name, model);
}

export function resolveModel<K extends ModelKind>(
  kind: K,
  name: string,
): ModelByKind[K] {
  const model = (registries[kind] as Map<string, ModelByKind[K]>).get(name);
  if (!model) {
    const known = [...registries[kind].keys()].join(', ');
    throw new UnknownModelError(`no ${kind} model named '${name}' (known: ${known})`);
  }
  return model;
}

export function modelNames(kind: ModelKind): string[] {
  return [...registries[kind].keys()].sort();
}

/** Resolve a full suite, defaulting any kind that is not overridden. */
export function createModelSuite(
  overrides: Partial<{ [K in ModelKind]: string }> = {},
): ModelSuite {
  return {
    depth: resolveModel('depth', overrides.depth ?? DEFAULT_MODELS.depth),
    segmentation: resolveModel(
      'segmentation',
      overrides.segmentation ?? DEFAULT_MODELS.segmentation,
    ),
    imageEncoder: resolveModel(
      'imageEncoder',
      overrides.imageEncoder ?? DEFAULT_MODELS.imageEncoder,
    ),
    captionEncoder: resolveModel(
      'captionEncoder',
      overrides.captionEncoder ?? DEFAULT_MODELS.captionEncoder,
    ),
    captioner: resolveModel('captioner', overrides.captioner ?? DEFAULT_MODELS.captioner),
    faceLocator: resolveModel(
      'faceLocator',
      overrides.faceLocator ?? DEFAULT_MODELS.faceLocator,
    ),
  };
}
