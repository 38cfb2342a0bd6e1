/**
 * Preparation pipeline: run the model suite over real images and serialize
 * everything in the compositing engine's file contract.
 *
 * Images are independent of each other; batch runs share nothing but the
 * output directory, so order never changes results.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { basename, dirname, join, relative } from 'node:path';
import { readImage, writeDepth, writeEmbedding, writeMask, writeRgbImage } from './formats.js';
import type { ModelSuite, FaceBox } from './models.js';
import { createModelSuite } from './models.js';
import { AssetPrepError, NoSubjectError } from './errors.js';

export interface ForegroundFiles {
  id: string;
  imagePath: string;
  maskPath: string;
  depthPath: string;
  faceBoxPath: string;
  visualEmbeddingPath: string;
  textEmbeddingPath: string;
  captionPath: string;
  faceBox: FaceBox;
  caption: string;
}

export interface BackgroundFiles {
  id: string;
  imagePath: string;
  depthPath: string;
  embeddingPath: string;
  captionPath: string | null;
  dim: number;
}

export interface BatchResult<T> {
  prepared: T[];
  skipped: { id: string; reason: string }[];
  manifestPath: string;
}

export function idFromPath(imagePath: string): string {
  const stem = basename(imagePath).replace(/\.[^.]*$/, '');
  const id = stem.replace(/[^A-Za-z0-9_-]+/g, '_').replace(/^_+|_+$/g, '');
  if (!id) {
    throw new AssetPrepError(`cannot derive an id from '${imagePath}'`);
  }
  return id;
}

/**
 * Run segmentation, depth, captioning, both encoders and the face locator
 * on one image; emit image, mask, depth, face box, embeddings and caption
 * record into outDir.
 */
export function prepareForeground(
  imagePath: string,
  outDir: string,
  suite: ModelSuite = createModelSuite(),
): ForegroundFiles {
  const id = idFromPath(imagePath);
  const image = readImage(imagePath);

  const mask = suite.segmentation.segment(image);
  if (!mask.some((v) => v !== 0)) {
    throw new NoSubjectError(`${imagePath}: segmentation found no subject`);
  }
  const faceBox = suite.faceLocator.locate(image, mask);
  if (!faceBox) {
    throw new NoSubjectError(`${imagePath}: no face located in the subject mask`);
  }

  const depth = suite.depth.estimate(image);
  const caption = suite.captioner.caption(image);
  if (!caption) {
    throw new AssetPrepError(`${imagePath}: captioner returned an empty caption`);
  }

  mkdirSync(outDir, { recursive: true });
  const files: ForegroundFiles = {
    id,
    imagePath: join(outDir, `${id}.png`),
    maskPath: join(outDir, `${id}_mask.png`),
    depthPath: join(outDir, `${id}.dmap`),
    faceBoxPath: join(outDir, `${id}_face.json`),
    visualEmbeddingPath: join(outDir, `${id}_visual.emb1`),
    textEmbeddingPath: join(outDir, `${id}_text.emb1`),
    captionPath: join(outDir, `${id}_caption.json`),
    faceBox,
    caption,
  };
  writeRgbImage(image, files.imagePath);
  writeMask(mask, image.width, image.height, files.maskPath);
  writeDepth(depth, files.depthPath);
  writeFileSync(files.faceBoxPath, JSON.stringify(faceBox, null, 2) + '\n');
  writeEmbedding(suite.imageEncoder.encode(image), files.visualEmbeddingPath);
  writeEmbedding(suite.captionEncoder.encode(caption), files.textEmbeddingPath);
  writeFileSync(
    files.captionPath,
    JSON.stringify(
      {
        imageId: id,
        caption,
        textEmbeddingPath: basename(files.textEmbeddingPath),
      },
      null,
      2,
    ) + '\n',
  );
  return files;
}

/**
 * Emit image, depth and visual embedding for one background, plus an
 * optional caption record when withCaption is set.
 */
export function prepareBackground(
  imagePath: string,
  outDir: string,
  suite: ModelSuite = createModelSuite(),
  withCaption = false,
): BackgroundFiles {
  const id = idFromPath(imagePath);
  const image = readImage(imagePath);
  const depth = suite.depth.estimate(image);
  const embedding = suite.imageEncoder.encode(image);

  mkdirSync(outDir, { recursive: true });
  const files: BackgroundFiles = {
    id,
    imagePath: join(outDir, `${id}.png`),
    depthPath: join(outDir, `${id}.dmap`),
    embeddingPath: join(outDir, `${id}.emb1`),
    captionPath: withCaption ? join(outDir, `${id}_caption.json`) : null,
    dim: suite.imageEncoder.dim,
  };
  writeRgbImage(image, files.imagePath);
  writeDepth(depth, files.depthPath);
  writeEmbedding(embedding, files.embeddingPath);
  if (files.captionPath) {
    const caption = suite.captioner.caption(image);
    const textPath = join(outDir, `${id}_text.emb1`);
    writeEmbedding(suite.captionEncoder.encode(caption), textPath);
    writeFileSync(
      files.captionPath,
      JSON.stringify(
        { imageId: id, caption, textEmbeddingPath: basename(textPath) },
        null,
        2,
      ) + '\n',
    );
  }
  return files;
}

function toManifestPath(filePath: string, manifestPath: string): string {
  return relative(dirname(manifestPath), filePath).split('\\').join('/');
}

/** Engine foreground manifest: id, image, mask, depth, faceBox, embeddings. */
export function writeForegroundManifest(
  entries: ForegroundFiles[],
  manifestPath: string,
): void {
  const rows = entries.map((e) => ({
    id: e.id,
    image: toManifestPath(e.imagePath, manifestPath),
    mask: toManifestPath(e.maskPath, manifestPath),
    depth: toManifestPath(e.depthPath, manifestPath),
    faceBox: e.faceBox,
    visualEmbedding: toManifestPath(e.visualEmbeddingPath, manifestPath),
    textEmbedding: toManifestPath(e.textEmbeddingPath, manifestPath),
  }));
  writeFileSync(manifestPath, JSON.stringify(rows, null, 2) + '\n');
}

/** Engine pool manifest: id, embedding, image, depth; dim recorded per entry. */
export function writeBackgroundManifest(
  entries: BackgroundFiles[],
  manifestPath: string,
): void {
  const rows = entries.map((e) => ({
    id: e.id,
    embedding: toManifestPath(e.embeddingPath, manifestPath),
    image: toManifestPath(e.imagePath, manifestPath),
    depth: toManifestPath(e.depthPath, manifestPath),
    dim: e.dim,
  }));
  writeFileSync(manifestPath, JSON.stringify(rows, null, 2) + '\n');
}

function assertUniqueIds(paths: string[]): void {
  const seen = new Map<string, string>();
  for (const p of paths) {
    const id = idFromPath(p);
    const first = seen.get(id);
    if (first !== undefined) {
      throw new AssetPrepError(`'${p}' and '${first}' both map to id '${id}'`);
    }
    seen.set(id, p);
  }
}

/**
 * Prepare many foregrounds; images the segmenter rejects are recorded as
 * skips instead of aborting the batch. The manifest lists the survivors.
 */
export function prepareForegrounds(
  imagePaths: string[],
  outDir: string,
  suite: ModelSuite = createModelSuite(),
): BatchResult<ForegroundFiles> {
  assertUniqueIds(imagePaths);
  const prepared: ForegroundFiles[] = [];
  const skipped: { id: string; reason: string }[] = [];
  for (const imagePath of imagePaths) {
    try {
      prepared.push(prepareForeground(imagePath, join(outDir, 'fg'), suite));
    } catch (err) {
      if (err instanceof NoSubjectError) {
        skipped.push({ id: idFromPath(imagePath), reason: err.message });
      } else {
        throw err;
      }
    }
  }
  const manifestPath = join(outDir, 'fg.json');
  mkdirSync(outDir, { recursive: true });
  writeForegroundManifest(prepared, manifestPath);
  return { prepared, skipped, manifestPath };
}

export function prepareBackgrounds(
  imagePaths: string[],
  outDir: string,
  suite: ModelSuite = createModelSuite(),
  withCaption = false,
): BatchResult<BackgroundFiles> {
  assertUniqueIds(imagePaths);
  const prepared: BackgroundFiles[] = [];
  for (const imagePath of imagePaths) {
    prepared.push(prepareBackground(imagePath, join(outDir, 'bg'), suite, withCaption));
  }
  const manifestPath = join(outDir, 'bg.json');
  mkdirSync(outDir, { recursive: true });
  writeBackgroundManifest(prepared, manifestPath);
  return { prepared, skipped: [], manifestPath };
}
